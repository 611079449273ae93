#include "cda/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/legendre.hpp>

#include "cda/linalg.hpp"

namespace cda::quadrature {
namespace {

constexpr double kPi = std::numbers::pi;

// New polynomials whose |w|-weighted norm exceeds their bilinear norm by
// more than 1/sqrt(eps) cannot be normalized meaningfully.
constexpr double kIsotropyLimit = 6.7e7;

// Lower end of the real segment relative to the effective cutoff radius of
// the theta rule; the mass below it is folded into the point at z = 0.
constexpr double kSegmentStartFraction = 1e-2;

bool rule_less(cplx a, cplx b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace

cplx unit_weight(cplx) { return {1.0, 0.0}; }

int ContourSpec::default_theta_points(int nodes) { return std::max(4 * nodes, 2000); }

int ContourSpec::resolved_theta_points() const {
  return theta_points > 0 ? theta_points : default_theta_points(nodes);
}

void ContourSpec::validate() const {
  if (!(radius > 0.0)) throw ConfigError("contour.radius must be > 0");
  if (nodes < 1) throw ConfigError("contour.nodes must be >= 1");
  if (resolved_theta_points() < 4 * nodes) {
    throw ConfigError("contour.theta_points must be >= 4 * contour.nodes (got " +
                      std::to_string(resolved_theta_points()) + ")");
  }
}

cplx DiscreteMeasure::total_mass() const {
  cplx sum{};
  for (const cplx& m : masses) sum += m;
  return sum;
}

BreakdownError::BreakdownError(int step, const std::string& what)
    : NumericalError("recurrence breakdown at step " + std::to_string(step) + ": " + what),
      step_(step) {}

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  const auto zeros = boost::math::legendre_p_zeros<double>(n);  // non-negative half
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  // zeros ascend from 0 (odd n) or the smallest positive root (even n)
  const std::size_t centre = static_cast<std::size_t>(n) / 2;
  const bool odd = n % 2 == 1;
  for (std::size_t k = 0; k < zeros.size(); ++k) {
    const double t = zeros[k];
    const double dp = boost::math::legendre_p_prime(n, t);
    const double wt = half * 2.0 / ((1.0 - t * t) * dp * dp);
    const std::size_t upper = centre + k;
    const std::size_t lower = odd ? centre - k : centre - 1 - k;
    x[upper] = mid + half * t;
    w[upper] = wt;
    x[lower] = mid - half * t;
    w[lower] = wt;
  }
}

DiscreteMeasure contour_measure(const ContourSpec& spec, const WeightFn& weight) {
  spec.validate();
  const int m = spec.resolved_theta_points();
  std::vector<double> theta, gw;
  gauss_legendre(m, kPi, 2.0 * kPi, theta, gw);
  DiscreteMeasure out;
  out.points.reserve(static_cast<std::size_t>(m));
  out.masses.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const cplx e = std::polar(1.0, theta[static_cast<std::size_t>(k)]);
    const cplx z = spec.radius * (1.0 + e);
    out.points.push_back(z);
    out.masses.push_back(gw[static_cast<std::size_t>(k)] * e / (1.0 + e) * weight(z));
  }
  return out;
}

DiscreteMeasure equivalent_real_measure(const ContourSpec& spec, const WeightFn& weight,
                                        double resolution) {
  spec.validate();
  const double top = 2.0 * spec.radius;
  const int n = spec.nodes;

  const cplx arc_mass = contour_measure(spec, weight).total_mass();
  // dz/(iz) over the theta rule has Im(mass) = -log(2R / r) for an effective
  // cutoff radius r around the origin.
  const cplx unit_mass = contour_measure(spec, unit_weight).total_mass();
  const double cutoff = top * std::exp(unit_mass.imag());
  const double start = kSegmentStartFraction * cutoff;

  DiscreteMeasure out;
  out.points.push_back(cplx{});
  out.masses.push_back(cplx{});  // filled below

  std::vector<double> x, w;
  cplx segment_mass{};
  // [0, start]: exact for z^k, k >= 1; its k = 0 part is absorbed by the point mass
  gauss_legendre(8, 0.0, start, x, w);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const cplx mass = w[k] * weight(cplx{x[k]}) / (kI * x[k]);
    out.points.emplace_back(x[k]);
    out.masses.push_back(mass);
    segment_mass += mass;
  }
  for (double lo = start; lo < top;) {
    const double hi = std::min(2.0 * lo, top);
    const int q = static_cast<int>(std::ceil(resolution * n * std::sqrt(hi / top))) + 8;
    gauss_legendre(q, lo, hi, x, w);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const cplx mass = w[k] * weight(cplx{x[k]}) / (kI * x[k]);
      out.points.emplace_back(x[k]);
      out.masses.push_back(mass);
      segment_mass += mass;
    }
    lo = hi;
  }
  out.masses.front() = arc_mass - segment_mass;
  return out;
}

RecurrenceCoeffs stieltjes_recurrence(const DiscreteMeasure& measure, int n) {
  const auto m = static_cast<Eigen::Index>(measure.size());
  if (n < 1) throw ConfigError("stieltjes_recurrence: N must be >= 1");
  if (m < 2 * n) {
    throw ConfigError("stieltjes_recurrence: measure has " + std::to_string(m) +
                      " points, needs >= 2N = " + std::to_string(2 * n));
  }

  RecurrenceCoeffs out;
  out.mu0 = measure.total_mass();
  if (out.mu0 == cplx{}) throw BreakdownError(0, "measure has zero total mass");

  Eigen::ArrayXcd z(m), w(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    z[k] = measure.points[static_cast<std::size_t>(k)];
    w[k] = measure.masses[static_cast<std::size_t>(k)];
  }
  const Eigen::ArrayXd abs_w = w.abs();

  out.mu.reserve(static_cast<std::size_t>(n));
  out.nu.reserve(static_cast<std::size_t>(n - 1));
  // eta_j at the points, orthonormal in sum_k w_k f(z_k) g(z_k)
  Eigen::ArrayXcd prev = Eigen::ArrayXcd::Zero(m);
  Eigen::ArrayXcd cur = Eigen::ArrayXcd::Constant(m, 1.0 / std::sqrt(out.mu0));
  Eigen::ArrayXcd next(m);
  cplx b_prev{};
  for (int j = 0; j < n; ++j) {
    const cplx a = (w * cur.square() * z).sum();
    out.mu.push_back(a / kI);
    if (j + 1 == n) break;

    next = (z - a) * cur - b_prev * prev;
    const cplx bilinear = (w * next.square()).sum();
    const double hermitian = (abs_w * next.abs2()).sum();
    if (!(hermitian > 0.0) || std::abs(bilinear) * kIsotropyLimit < hermitian) {
      throw BreakdownError(j + 1, "<eta,eta> unresolved (|<q,q>| = " +
                                      std::to_string(std::abs(bilinear)) +
                                      ", sum |w||q|^2 = " + std::to_string(hermitian) + ")");
    }
    const cplx b = std::sqrt(bilinear);
    out.nu.push_back(bilinear);
    prev.swap(cur);
    cur = next / b;
    b_prev = b;
  }
  return out;
}

std::vector<cplx> evaluate_polynomials(const RecurrenceCoeffs& coeffs, cplx z) {
  const std::size_t n = coeffs.size();
  std::vector<cplx> eta(n);
  if (n == 0) return eta;
  eta[0] = 1.0 / std::sqrt(coeffs.mu0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    cplx next = (z - kI * coeffs.mu[j]) * eta[j];
    if (j > 0) next -= std::sqrt(coeffs.nu[j - 1]) * eta[j - 1];
    eta[j + 1] = next / std::sqrt(coeffs.nu[j]);
  }
  return eta;
}

double orthonormality_residual(const RecurrenceCoeffs& coeffs, const DiscreteMeasure& measure) {
  const auto n = static_cast<Eigen::Index>(coeffs.size());
  const auto m = static_cast<Eigen::Index>(measure.size());
  CMatrix values(m, n);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto eta = evaluate_polynomials(coeffs, measure.points[static_cast<std::size_t>(k)]);
    const cplx root = std::sqrt(measure.masses[static_cast<std::size_t>(k)]);
    for (Eigen::Index j = 0; j < n; ++j) values(k, j) = root * eta[static_cast<std::size_t>(j)];
  }
  const CMatrix gram = values.transpose() * values;
  return (gram - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

RecurrenceCoeffs laguerre_recurrence(double s, int n) {
  RecurrenceCoeffs out;
  out.mu0 = std::tgamma(s + 1.0);
  for (int k = 0; k < n; ++k) out.mu.push_back((2.0 * k + s + 1.0) / kI);
  for (int k = 1; k < n; ++k) out.nu.emplace_back(k * (k + s));
  return out;
}

QuadratureRule QuadratureRule::rescaled(double new_scale) const {
  QuadratureRule out = *this;
  for (cplx& z : out.nodes) z *= new_scale / scale;
  out.scale = new_scale;
  return out;
}

QuadratureRule golub_welsch(const RecurrenceCoeffs& coeffs, double omega_c, RuleKind kind) {
  const auto n = static_cast<Eigen::Index>(coeffs.size());
  if (n == 0) throw ConfigError("golub_welsch: empty recurrence");
  if (static_cast<Eigen::Index>(coeffs.nu.size()) != n - 1) {
    throw ConfigError("golub_welsch: expected N-1 off-diagonal coefficients");
  }
  QuadratureRule rule;
  rule.kind = kind;
  rule.scale = omega_c;
  rule.mu0 = coeffs.mu0;

  std::vector<std::pair<cplx, cplx>> pairs;  // (node, weight)
  pairs.reserve(static_cast<std::size_t>(n));

  if (kind == RuleKind::RealAxis) {
    Eigen::VectorXd diag(n), off(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index j = 0; j < n; ++j) {
      const cplx a = kI * coeffs.mu[static_cast<std::size_t>(j)];
      if (std::abs(a.imag()) > 1e-12 * (1.0 + std::abs(a))) {
        throw NumericalError("golub_welsch: real-axis rule needs real recurrence coefficients");
      }
      diag[j] = a.real();
    }
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
      const cplx nu = coeffs.nu[static_cast<std::size_t>(j)];
      if (nu.real() <= 0.0 || std::abs(nu.imag()) > 1e-12 * std::abs(nu)) {
        throw NumericalError("golub_welsch: real-axis rule needs positive nu_n");
      }
      off[j] = std::sqrt(nu.real());
    }
    const auto es = linalg::eig_tridiagonal(diag, off);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v0 = es.vectors(0, i);
      pairs.emplace_back(omega_c * es.values[i], coeffs.mu0 * v0 * v0);
    }
  } else {
    CMatrix jacobi = CMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) jacobi(j, j) = kI * coeffs.mu[static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
      const cplx b = std::sqrt(coeffs.nu[static_cast<std::size_t>(j)]);
      jacobi(j, j + 1) = b;
      jacobi(j + 1, j) = b;
    }
    // The eigenvector of node x is (p_0(x), ..., p_{N-1}(x)) with p_0 = 1, so
    // w = mu0 v_0^2 / v^T v = mu0 / sum_k p_k(x)^2 (Christoffel function).
    const CVector values = linalg::hessenberg_eigvals(std::move(jacobi));
    for (Eigen::Index i = 0; i < n; ++i) {
      const cplx x = values[i];
      cplx p_prev{}, p = 1.0, vtv = 1.0;
      double vhv = 1.0;
      for (std::size_t j = 0; j + 1 < static_cast<std::size_t>(n); ++j) {
        const cplx b = std::sqrt(coeffs.nu[j]);
        const cplx p_next =
            ((x - kI * coeffs.mu[j]) * p - (j > 0 ? std::sqrt(coeffs.nu[j - 1]) : 0.0) * p_prev) / b;
        p_prev = p;
        p = p_next;
        vtv += p * p;
        vhv += std::norm(p);
      }
      if (!std::isfinite(vhv) || std::abs(vtv) < 1e-10 * vhv) {
        throw NumericalError("golub_welsch: Jacobi matrix is numerically defective at node " +
                             std::to_string(i));
      }
      pairs.emplace_back(omega_c * x, coeffs.mu0 / vtv);
    }
  }

  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return rule_less(a.first, b.first); });
  for (const auto& [node, weight] : pairs) {
    rule.nodes.push_back(node);
    rule.weights.push_back(weight);
  }
  return rule;
}

double gauss_exactness_check(const QuadratureRule& rule, const DiscreteMeasure& measure,
                             int degree) {
  const std::size_t n = rule.size();
  std::vector<cplx> node_pow(n, cplx{1.0});
  std::vector<cplx> point_pow(measure.size(), cplx{1.0});
  double worst = 0.0;
  for (int k = 0; k <= degree; ++k) {
    cplx quad{}, moment{};
    for (std::size_t i = 0; i < n; ++i) quad += rule.weights[i] * node_pow[i];
    for (std::size_t j = 0; j < measure.size(); ++j) moment += measure.masses[j] * point_pow[j];
    worst = std::max(worst, std::abs(quad - moment) / (1.0 + std::abs(moment)));
    for (std::size_t i = 0; i < n; ++i) node_pow[i] *= rule.variable(i);
    for (std::size_t j = 0; j < measure.size(); ++j) point_pow[j] *= measure.points[j];
  }
  return worst;
}

QuadratureRule real_space_rule(const spectral::ModelParams& p, int n) {
  if (n < 1) throw ConfigError("real_space_rule: N must be >= 1");
  return golub_welsch(laguerre_recurrence(p.s, n), p.omega_c, RuleKind::RealAxis);
}

RecurrenceCoeffs contour_recurrence(const ContourSpec& spec, const WeightFn& weight) {
  return stieltjes_recurrence(equivalent_real_measure(spec, weight), spec.nodes);
}

QuadratureRule contour_rule(const ContourSpec& spec, double omega_c, const WeightFn& weight) {
  return golub_welsch(contour_recurrence(spec, weight), omega_c, RuleKind::ComplexContour);
}

}  // namespace cda::quadrature
