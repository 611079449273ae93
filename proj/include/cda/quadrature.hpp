#pragma once

// Complex Gauss quadrature along the semicircle z = R(1 + e^{i theta}),
// theta in [pi, 2pi], for the non-conjugated bilinear form
//
//     <f, g> = int_Gamma dz/(i z) w(z) f(z) g(z),
//
// plus the classical real-axis rule for x^s e^{-x} used by the
// real-space chain baseline.
//
// The dz/(iz) measure is logarithmically singular at z = 0. The singularity
// is regularized by sampling theta with an M-point Gauss-Legendre rule whose
// nodes are all interior, so theta = pi is never evaluated and M acts as the
// regularization parameter.

#include <functional>
#include <vector>

#include "cda/spectral.hpp"
#include "cda/types.hpp"

namespace cda::quadrature {

using WeightFn = std::function<cplx(cplx)>;

/// w(z) = 1.
cplx unit_weight(cplx z);

struct ContourSpec {
  double radius = 6.0;
  int nodes = 2000;
  int theta_points = 0;  // 0 selects max(4N, 2000)

  static int default_theta_points(int nodes);
  int resolved_theta_points() const;
  void validate() const;
};

struct DiscreteMeasure {
  std::vector<cplx> points;
  std::vector<cplx> masses;

  cplx total_mass() const;
  std::size_t size() const { return points.size(); }
};

/// Gauss-Legendre nodes and weights on [a, b], ascending.
void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

/// M-point theta rule mapped onto the semicircle: mass_k = W_k e^{i th}/(1+e^{i th}) w(z_k).
DiscreteMeasure contour_measure(const ContourSpec& spec, const WeightFn& weight = unit_weight);

/// A measure on the real segment (0, 2R] with the same polynomial moments as
/// contour_measure(spec, weight). For polynomial integrands the contour
/// integral is path independent, so the arc can be collapsed onto the real
/// axis where orthogonal polynomials stay bounded; sampling on the arc makes
/// them grow geometrically and the recurrence loses all precision after a
/// few dozen steps. Layout: a point mass at z = 0 carrying the regularized
/// singular mass, then graded Gauss-Legendre panels of dx w(x)/(i x).
/// `resolution` scales the per-panel point count relative to N.
DiscreteMeasure equivalent_real_measure(const ContourSpec& spec,
                                        const WeightFn& weight = unit_weight,
                                        double resolution = 1.5);

struct RecurrenceCoeffs {
  std::vector<cplx> mu;  // N entries; diagonal of the Jacobi matrix is i*mu
  std::vector<cplx> nu;  // N-1 entries; off-diagonal is sqrt(nu)
  cplx mu0;              // total mass

  std::size_t size() const { return mu.size(); }
};

class BreakdownError : public NumericalError {
 public:
  BreakdownError(int step, const std::string& what);
  int step() const { return step_; }

 private:
  int step_;
};

/// Discretized Stieltjes procedure in the bilinear form. Throws
/// BreakdownError when a new polynomial is numerically isotropic, i.e.
/// <eta_n, eta_n> cannot be resolved to ~sqrt(eps) relative precision.
RecurrenceCoeffs stieltjes_recurrence(const DiscreteMeasure& measure, int n);

/// Values of the orthonormal polynomials eta_0..eta_{N-1} at `z` via the
/// three-term recurrence.
std::vector<cplx> evaluate_polynomials(const RecurrenceCoeffs& coeffs, cplx z);

/// max_{m,n} |<eta_m, eta_n> - delta_mn| over the measure.
double orthonormality_residual(const RecurrenceCoeffs& coeffs, const DiscreteMeasure& measure);

/// Classical monic recurrence of the generalized Laguerre weight x^s e^{-x}
/// on [0, inf), stored in the same i-convention (i mu_n = alpha_n real).
RecurrenceCoeffs laguerre_recurrence(double s, int n);

enum class RuleKind { ComplexContour, RealAxis };

struct QuadratureRule {
  std::vector<cplx> nodes;    // energies: scale * (dimensionless node)
  std::vector<cplx> weights;  // measure weights, sum to mu0
  RuleKind kind = RuleKind::ComplexContour;
  double scale = 1.0;  // omega_c used when building the nodes
  cplx mu0;

  std::size_t size() const { return nodes.size(); }
  /// Node in the dimensionless variable z of h(z) = wc z.
  cplx variable(std::size_t i) const { return nodes[i] / scale; }
  QuadratureRule rescaled(double new_scale) const;
};

/// Nodes/weights from the tridiagonal Jacobi matrix (diag i mu_n, off
/// sqrt(nu_n)); w_i = mu0 v_i[0]^2 with v_i normalized by v^T v = 1.
/// Sorted by ascending real part, then ascending imaginary part.
QuadratureRule golub_welsch(const RecurrenceCoeffs& coeffs, double omega_c,
                            RuleKind kind = RuleKind::ComplexContour);

/// max_{k <= degree} |sum_i w_i z_i^k - <z^k, 1>| / (1 + |<z^k, 1>|).
double gauss_exactness_check(const QuadratureRule& rule, const DiscreteMeasure& measure,
                             int degree);

/// Classical Gauss rule for (x/wc)^s e^{-x/wc} on [0, inf): nodes in energy
/// units, weights for the dimensionless measure y^s e^{-y} dy.
QuadratureRule real_space_rule(const spectral::ModelParams& p, int n);

/// Recurrence of the regularized contour measure (via equivalent_real_measure).
RecurrenceCoeffs contour_recurrence(const ContourSpec& spec, const WeightFn& weight = unit_weight);

/// Complete complex-contour rule for the given spec.
QuadratureRule contour_rule(const ContourSpec& spec, double omega_c,
                            const WeightFn& weight = unit_weight);

}  // namespace cda::quadrature
