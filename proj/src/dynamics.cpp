#include "cda/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <Eigen/LU>

#include "cda/linalg.hpp"

namespace cda::dynamics {

double Spectrum::max_imag() const {
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < values.size(); ++i) m = std::max(m, values[i].imag());
  return m;
}

double Spectrum::biorthogonality_residual() const {
  const CMatrix g = left * right;
  return (g - CMatrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
}

double Spectrum::completeness_residual() const {
  const CMatrix g = right * left;
  return (g - CMatrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
}

namespace {

Spectrum from_hermitian(linalg::HermitianEigen es) {
  Spectrum out;
  out.values = es.values.cast<cplx>();
  out.left = es.vectors.adjoint();
  out.right = std::move(es.vectors);
  out.hermitian = true;
  return out;
}

}  // namespace

Spectrum diagonalize(const CMatrix& m, bool hermitian) {
  if (!m.allFinite()) throw NumericalError("diagonalize: matrix has non-finite entries");
  if (hermitian) return from_hermitian(linalg::eigh(m));

  auto es = linalg::eig(m);
  Spectrum out;
  out.values = std::move(es.values);
  out.right = std::move(es.vectors);
  Eigen::PartialPivLU<CMatrix> lu(out.right);
  const double rcond = lu.rcond();
  out.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(out.condition < kConditionWarning)) {
    std::ostringstream msg;
    msg << "eigenvector matrix is ill-conditioned (cond ~ " << std::setprecision(3)
        << out.condition << "); nearly defective eigenvalues";
    out.warning = msg.str();
  }
  out.left = lu.inverse();
  return out;
}

Spectrum diagonalize(const hamiltonian::EffectiveHamiltonian& h) {
  return diagonalize(h.matrix, h.is_hermitian_variant());
}

Spectrum hermitianized_spectrum(const hamiltonian::EffectiveHamiltonian& h) {
  if (h.is_hermitian_variant() && h.variant == hamiltonian::Variant::Hermitianized) {
    return diagonalize(h.matrix, true);
  }
  const CMatrix gram = linalg::gram(h.matrix);
  auto es = linalg::eigh(gram);
  const double top = es.values.size() > 0 ? std::max(1.0, es.values.maxCoeff()) : 1.0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    if (es.values[i] < -1e-10 * top) {
      throw NumericalError("hermitianized_spectrum: H^dag H has eigenvalue " +
                           std::to_string(es.values[i]));
    }
    es.values[i] = std::sqrt(std::max(es.values[i], 0.0));
  }
  return from_hermitian(std::move(es));
}

std::vector<double> uniform_grid(double t_max, double dt) {
  if (!(dt > 0.0) || !(t_max >= 0.0)) throw ConfigError("time grid needs dt > 0 and t_max >= 0");
  const auto steps = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
  std::vector<double> t(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) t[i] = static_cast<double>(i) * dt;
  return t;
}

void check_contractive(const Spectrum& spec, double tol) {
  if (spec.hermitian) return;
  const double m = spec.max_imag();
  if (m > tol) {
    std::ostringstream msg;
    msg << "spectrum has Im E = " << std::setprecision(6) << m
        << " > 0; the propagator would grow without bound";
    throw NumericalError(msg.str());
  }
}

CVector evolve(const Spectrum& spec, const CVector& psi0, double t) {
  const CVector c = spec.left * psi0;
  CVector phased(c.size());
  for (Eigen::Index n = 0; n < c.size(); ++n) phased[n] = std::exp(-kI * spec.values[n] * t) * c[n];
  return spec.right * phased;
}

ComplexTrajectory propagate(const Spectrum& spec, const CVector& psi0,
                            std::span<const double> times, Eigen::Index index, double im_tol) {
  if (psi0.size() != spec.dim()) throw ConfigError("propagate: state dimension mismatch");
  check_contractive(spec, im_tol);
  const CVector c = spec.left * psi0;
  CVector d(c.size());
  if (index < 0) {
    d = (psi0.adjoint() * spec.right).transpose().cwiseProduct(c);
  } else {
    d = spec.right.row(index).transpose().cwiseProduct(c);
  }
  ComplexTrajectory out;
  out.label = index < 0 ? "overlap" : "amplitude_" + std::to_string(index);
  out.times.assign(times.begin(), times.end());
  out.values.resize(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    cplx acc{};
    for (Eigen::Index n = 0; n < d.size(); ++n) acc += d[n] * std::exp(-kI * spec.values[n] * times[j]);
    out.values[j] = acc;
  }
  return out;
}

Trajectory survival_probability(const Spectrum& spec, const CVector& psi0,
                                std::span<const double> times) {
  const auto amp = propagate(spec, psi0, times);
  Trajectory out;
  out.label = "survival";
  out.times = amp.times;
  out.values.reserve(amp.values.size());
  for (const cplx a : amp.values) out.values.push_back(std::norm(a));
  return out;
}

BlendedSurvival blended_survival(const Spectrum& h, const Spectrum& h_tilde, const CVector& psi0,
                                 std::span<const double> times, double t_switch) {
  BlendedSurvival out;
  out.t_switch = t_switch;
  out.trajectory.label = "survival_blended";
  out.trajectory.times.assign(times.begin(), times.end());
  const auto seam = std::find_if(times.begin(), times.end(),
                                 [&](double t) { return t >= t_switch; });
  const auto split = static_cast<std::size_t>(seam - times.begin());

  std::vector<double> early_t(times.begin(), times.begin() + split);
  std::vector<double> late_t(times.begin() + split, times.end());
  // evaluate both sides at the seam to report the jump
  if (split < times.size() && split > 0) early_t.push_back(times[split]);
  const auto early = survival_probability(h, psi0, early_t);
  const auto late = survival_probability(h_tilde, psi0, late_t);

  for (std::size_t i = 0; i < split; ++i) out.trajectory.values.push_back(early.values[i]);
  for (const double v : late.values) out.trajectory.values.push_back(v);
  if (split < times.size() && split > 0) {
    out.seam_jump = std::abs(late.values.front() - early.values.back());
  }
  return out;
}

CVector spin_excited_state(Eigen::Index dim) {
  CVector psi = CVector::Zero(dim);
  psi[0] = 1.0;
  return psi;
}

CVector uniform_double_state(std::size_t modes) {
  const auto dim = static_cast<Eigen::Index>(hamiltonian::double_sector_dimension(modes));
  CVector psi = CVector::Zero(dim);
  const double a = 1.0 / std::sqrt(static_cast<double>(modes));
  for (std::size_t k = 0; k < modes; ++k) psi[static_cast<Eigen::Index>(k)] = a;
  return psi;
}

DoubleObservables pe_double(const Spectrum& spec, const CVector& psi0, std::size_t modes,
                            std::span<const double> times, std::size_t norm_stride) {
  if (psi0.size() != spec.dim()) throw ConfigError("pe_double: state dimension mismatch");
  check_contractive(spec);
  if (norm_stride == 0) norm_stride = std::max<std::size_t>(1, times.size() / 20);
  const CVector c = spec.left * psi0;
  const auto n = static_cast<Eigen::Index>(modes);
  const CMatrix spin_block = spec.right.topRows(n);

  DoubleObservables out;
  out.pe.label = "pe";
  out.norm.label = "norm";
  out.pe.times.assign(times.begin(), times.end());
  CVector phased(c.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    for (Eigen::Index k = 0; k < c.size(); ++k) phased[k] = std::exp(-kI * spec.values[k] * times[j]) * c[k];
    out.pe.values.push_back((spin_block * phased).squaredNorm());
    if (j % norm_stride == 0 || j + 1 == times.size()) {
      out.norm.times.push_back(times[j]);
      out.norm.values.push_back((spec.right * phased).squaredNorm());
    }
  }
  return out;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = open_csv(path);
  out << "t," << (traj.label.empty() ? "value" : traj.label) << '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << traj.times[i] << ',' << traj.values[i] << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const ComplexTrajectory& traj) {
  auto out = open_csv(path);
  out << "t,re,im\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << traj.times[i] << ',' << traj.values[i].real() << ',' << traj.values[i].imag() << '\n';
  }
}

Trajectory read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  Trajectory traj;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty trajectory file " + path.string());
  const auto comma = line.find(',');
  traj.label = comma == std::string::npos ? "value" : line.substr(comma + 1);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string t, v;
    if (!std::getline(fields, t, ',') || !std::getline(fields, v, ',')) {
      throw ConfigError(path.string() + ":" + std::to_string(row) + ": expected t,value");
    }
    try {
      traj.times.push_back(std::stod(t));
      traj.values.push_back(std::stod(v));
    } catch (const std::exception&) {
      throw ConfigError(path.string() + ":" + std::to_string(row) + ": malformed number");
    }
  }
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    if (!(traj.times[i] > traj.times[i - 1])) {
      throw ConfigError(path.string() + ": times must be strictly increasing");
    }
  }
  return traj;
}

}  // namespace cda::dynamics
