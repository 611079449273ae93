#include "cda/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include <Eigen/LU>

#include "cda/linalg.hpp"

namespace cda::analysis {

Eigen::Index ground_index(const CVector& values) {
  if (values.size() == 0) throw ConfigError("ground_state: empty spectrum");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    const cplx a = values[i], b = values[best];
    if (a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag())) best = i;
  }
  return best;
}

namespace {

void fill_vector_stats(GroundStateReport& r, const CVector& right, const CVector& left) {
  const CVector unit = right / right.norm();
  unit.cwiseAbs().maxCoeff(&r.pmp_index);
  const double spin = std::norm(unit[0]);
  r.sigma_z = spin - (1.0 - spin);

  const cplx pair = left.transpose() * right;
  const cplx spin_pair = left[0] * right[0];
  r.sigma_z_biorthogonal = ((2.0 * spin_pair - pair) / pair).real();
}

}  // namespace

GroundStateReport ground_state(const dynamics::Spectrum& spec) {
  GroundStateReport r;
  r.eigen_index = ground_index(spec.values);
  r.eigenvalue = spec.values[r.eigen_index];
  r.gap = std::max(0.0, -r.eigenvalue.real());
  fill_vector_stats(r, spec.right.col(r.eigen_index), spec.left.row(r.eigen_index).transpose());
  return r;
}

GroundStateReport ground_state(const hamiltonian::EffectiveHamiltonian& h, CVector* values_out) {
  const bool herm = h.is_hermitian_variant();
  GroundStateReport r;
  if (herm) {
    const auto es = linalg::eigh(h.matrix);
    if (values_out) *values_out = es.values.cast<cplx>();
    r.eigen_index = 0;
    r.eigenvalue = es.values[0];
    r.gap = std::max(0.0, -es.values[0]);
    const CVector v = es.vectors.col(0);
    fill_vector_stats(r, v, v.conjugate());
    return r;
  }
  const CVector values = linalg::eigvals(h.matrix);
  if (values_out) *values_out = values;
  r.eigen_index = ground_index(values);
  r.eigenvalue = values[r.eigen_index];
  r.gap = std::max(0.0, -r.eigenvalue.real());

  // inverse iteration with a shift just off the eigenvalue
  const double scale = std::max(1.0, h.matrix.cwiseAbs().maxCoeff());
  const cplx shift = r.eigenvalue + cplx{1e-10, 1e-10} * scale;
  const CMatrix shifted = h.matrix - shift * CMatrix::Identity(h.dim(), h.dim());
  Eigen::PartialPivLU<CMatrix> lu(shifted);
  const CMatrix lu_t = shifted.transpose();
  Eigen::PartialPivLU<CMatrix> lu_left(lu_t);
  CVector right = CVector::Ones(h.dim()) / std::sqrt(static_cast<double>(h.dim()));
  CVector left = right;
  for (int it = 0; it < 3; ++it) {
    right = lu.solve(right);
    right /= right.norm();
    left = lu_left.solve(left);
    left /= left.norm();
  }
  if (!right.allFinite() || !left.allFinite()) {
    throw NumericalError("ground_state: inverse iteration failed");
  }
  fill_vector_stats(r, right, left);
  return r;
}

std::string to_string(Region r) {
  switch (r) {
    case Region::Delocalized: return "I";
    case Region::Localized: return "II";
    case Region::Intermediate: return "III";
  }
  return "?";
}

Region classify_region(double gap, Eigen::Index pmp_index, double gap_tol) {
  if (gap <= gap_tol) return Region::Delocalized;
  if (pmp_index == 0) return Region::Localized;
  return Region::Intermediate;
}

PhasePoint evaluate_point(double s, double eta, const quadrature::QuadratureRule& rule,
                          const ScanConfig& config) {
  spectral::ModelParams p = config.base;
  p.s = s;
  p.eta = eta;
  p.validate();
  const auto bath = hamiltonian::bath_modes(rule.rescaled(p.omega_c), p);
  const auto h = hamiltonian::build_single(bath, p, config.coupling);
  const auto g = ground_state(h);
  PhasePoint pt;
  pt.s = s;
  pt.eta = eta;
  pt.gap = g.gap;
  pt.pmp_index = g.pmp_index;
  pt.sigma_z = g.sigma_z;
  pt.sigma_z_biorthogonal = g.sigma_z_biorthogonal;
  pt.region = classify_region(g.gap, g.pmp_index, config.gap_tol * p.delta);
  return pt;
}

namespace {

template <typename Pred>
double refine(double lo, double hi, int steps, Pred satisfied) {
  for (int i = 0; i < steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (satisfied(mid)) hi = mid; else lo = mid;
  }
  return hi;
}

}  // namespace

ScanResult scan_eta(double s, std::span<const double> eta_grid,
                    const quadrature::QuadratureRule& rule, const ScanConfig& config) {
  if (eta_grid.empty()) throw ConfigError("scan_eta: empty eta grid");
  for (std::size_t i = 1; i < eta_grid.size(); ++i) {
    if (!(eta_grid[i] > eta_grid[i - 1])) throw ConfigError("scan_eta: eta grid must be ascending");
  }
  ScanResult result;
  result.s = s;
  result.points.resize(eta_grid.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < eta_grid.size(); i = next++) {
      try {
        result.points[i] = evaluate_point(s, eta_grid[i], rule, config);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int jobs = std::clamp(config.jobs, 1, static_cast<int>(eta_grid.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  const double tol = config.gap_tol * config.base.delta;
  std::optional<std::size_t> first_open, first_spin;
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const auto& pt = result.points[i];
    if (!first_open && pt.gap > tol) first_open = i;
    if (!first_spin && pt.pmp_index == 0) first_spin = i;
  }
  if (first_open) {
    for (std::size_t i = *first_open + 1; i < result.points.size(); ++i) {
      if (result.points[i].gap > tol) continue;
      std::ostringstream msg;
      msg << "s=" << s << ": gap closes again at eta=" << result.points[i].eta
          << " after opening at eta=" << eta_grid[*first_open] << "; reporting the first crossing";
      result.warnings.push_back(msg.str());
      break;
    }
  }

  if (first_open) {
    const std::size_t i = *first_open;
    result.eta_I = eta_grid[i];
    if (config.refine_steps > 0 && i > 0) {
      result.eta_I = refine(eta_grid[i - 1], eta_grid[i], config.refine_steps, [&](double eta) {
        return evaluate_point(s, eta, rule, config).gap > tol;
      });
    }
  }
  if (first_spin) {
    const std::size_t i = *first_spin;
    result.eta_II = eta_grid[i];
    if (config.refine_steps > 0 && i > 0) {
      result.eta_II = refine(eta_grid[i - 1], eta_grid[i], config.refine_steps, [&](double eta) {
        return evaluate_point(s, eta, rule, config).pmp_index == 0;
      });
    }
  }
  return result;
}

std::vector<SensitivityRow> rn_sensitivity(double s, std::span<const double> eta_grid,
                                           std::span<const double> radii,
                                           std::span<const int> nodes, const ScanConfig& config,
                                           const RuleProvider& provider) {
  std::vector<SensitivityRow> rows;
  for (const double r : radii) {
    for (const int n : nodes) {
      quadrature::ContourSpec spec;
      spec.radius = r;
      spec.nodes = n;
      const auto rule = provider ? provider(spec) : quadrature::contour_rule(spec, 1.0);
      const auto scan = scan_eta(s, eta_grid, rule, config);
      rows.push_back({r, n, scan.eta_I, scan.eta_II});
    }
  }
  return rows;
}

std::pair<double, double> default_fit_window(const dynamics::Trajectory& traj, double seam) {
  if (traj.times.size() < 2) throw ConfigError("fit: trajectory needs at least two points");
  const double t0 = traj.times.front(), t1 = traj.times.back();
  return {std::max(t0 + 0.4 * (t1 - t0), seam), t1};
}

StretchedFit stretched_fit(const dynamics::Trajectory& traj, double t_lo, double t_hi) {
  std::vector<double> t, y;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.times[i] < t_lo || traj.times[i] > t_hi) continue;
    if (!(traj.values[i] > 0.0)) {
      throw ConfigError("stretched_fit: non-positive value at t=" + std::to_string(traj.times[i]));
    }
    t.push_back(traj.times[i]);
    y.push_back(traj.values[i]);
  }
  if (t.size() < 4) throw ConfigError("stretched_fit: fewer than 4 points in the window");
  if (!(t.front() > 0.0)) throw ConfigError("stretched_fit: window must start at t > 0");
  const auto m = static_cast<Eigen::Index>(t.size());

  // double-log initialization: ln(-ln(y/B0)) = ln A + beta ln t
  double b0 = y.front();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double ratio = y[i] / b0;
    if (ratio <= 0.0 || ratio >= 1.0) continue;
    const double X = std::log(t[i]), Y = std::log(-std::log(ratio));
    sx += X; sy += Y; sxx += X * X; sxy += X * Y;
    ++used;
  }
  Eigen::Vector3d par;  // A, B, beta
  double beta0 = 1.0, a0 = 1.0 / t.back();
  if (used >= 2 && sxx * used - sx * sx > 0.0) {
    beta0 = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    a0 = std::exp((sy - beta0 * sx) / used);
  }
  beta0 = std::clamp(beta0, 0.01, 2.0);
  par << a0, b0, beta0;

  const auto project = [](Eigen::Vector3d p) {
    p[0] = std::max(p[0], 0.0);
    p[1] = std::max(p[1], 0.0);
    p[2] = std::clamp(p[2], 1e-6, 2.0);
    return p;
  };
  const auto residuals = [&](const Eigen::Vector3d& p) {
    Eigen::VectorXd r(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      r[i] = p[1] * std::exp(-p[0] * std::pow(t[static_cast<std::size_t>(i)], p[2])) -
             y[static_cast<std::size_t>(i)];
    }
    return r;
  };

  StretchedFit fit;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  Eigen::VectorXd r = residuals(par);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (fit.iterations = 1; fit.iterations <= 200; ++fit.iterations) {
    Eigen::MatrixXd jac(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double ti = t[static_cast<std::size_t>(i)];
      const double tb = std::pow(ti, par[2]);
      const double e = std::exp(-par[0] * tb);
      jac(i, 0) = -par[1] * tb * e;
      jac(i, 1) = e;
      jac(i, 2) = -par[1] * par[0] * tb * std::log(ti) * e;
    }
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d grad = jac.transpose() * r;
    bool accepted = false;
    Eigen::Vector3d step = Eigen::Vector3d::Zero();
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      Eigen::Matrix3d damped = jtj;
      for (int k = 0; k < 3; ++k) damped(k, k) += lambda * std::max(jtj(k, k), 1e-300);
      step = damped.ldlt().solve(-grad);
      const Eigen::Vector3d trial = project(par + step);
      const Eigen::VectorXd r_trial = residuals(trial);
      const double c_trial = r_trial.squaredNorm();
      if (std::isfinite(c_trial) && c_trial <= cost) {
        step = trial - par;
        par = trial;
        r = r_trial;
        cost = c_trial;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
      } else {
        lambda *= 3.0;
      }
    }
    // no downhill step left at any damping: stationary point
    if (!accepted || step.norm() <= 1e-8 * std::max(par.norm(), 1e-300)) {
      fit.converged = true;
      break;
    }
  }
  fit.iterations = std::min(fit.iterations, 200);
  fit.A = par[0];
  fit.B = par[1];
  fit.beta = par[2];
  fit.residual = std::sqrt(cost / static_cast<double>(m));
  return fit;
}

}  // namespace cda::analysis
