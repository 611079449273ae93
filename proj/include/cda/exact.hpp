#pragma once

// Reference solutions of the single-excitation problem without bath
// discretization: the memory-kernel equation for alpha(t) and the bound-state
// pole of its Laplace transform.

#include <optional>
#include <vector>

#include "cda/dynamics.hpp"
#include "cda/spectral.hpp"

namespace cda::exact {

inline constexpr double kPaperStep = 1e-4;
inline constexpr double kFastStep = 1e-3;

/// i alpha' = delta alpha - i int_0^t K(t - tau) alpha(tau) dtau, alpha(0) = 1.
/// Trapezoidal history sum with a trapezoidal (Crank-Nicolson) step. The
/// corrector is linear in alpha_{n+1} and is solved exactly, so this is the
/// predictor-corrector iterated to convergence. O(steps^2).
dynamics::ComplexTrajectory volterra_alpha(const spectral::ModelParams& p, double t_max = 10.0,
                                           double dt = kPaperStep);

/// |alpha|^2 on every `stride`-th step of a trajectory.
dynamics::Trajectory survival_from_alpha(const dynamics::ComplexTrajectory& alpha,
                                         std::size_t stride = 1);

/// F(E) = delta - E + int_0^inf J(w) / (E - w) dw for E < 0.
double bound_state_function(double energy, const spectral::ModelParams& p);

/// Root of F on (-1e3 delta, 0), or nullopt when no bound state exists
/// (s > 0 and eta <= delta / (wc Gamma(s))).
std::optional<double> bound_state_energy(const spectral::ModelParams& p);

struct BoundState {
  double energy = 0.0;
  double residue = 0.0;  // negative: alpha(t) ~ residue exp(-i E t)
  double plateau = 0.0;  // residue^2

  cplx asymptotic(double t) const;
};

/// residue = -1 / (1 + int J / (E_b - w)^2 dw).
BoundState bound_state_residue(const spectral::ModelParams& p, double energy);

struct ErrorSeries {
  dynamics::Trajectory error;
  std::vector<bool> flagged;  // a + b < 1e-12, value set to 0
  std::size_t flagged_count = 0;

  double sup_abs(double t_lo, double t_hi) const;
};

/// Linear interpolation of `traj` onto `times` (which must lie inside its range).
dynamics::Trajectory resample(const dynamics::Trajectory& traj, const std::vector<double>& times);

/// (a - b) / (a + b) on the grid of `cda`; `reference` is resampled when its
/// grid differs.
ErrorSeries error_metric(const dynamics::Trajectory& cda, const dynamics::Trajectory& reference);

}  // namespace cda::exact
