#pragma once

// Ground-state diagnostics, phase-boundary scans and stretched-exponential fits.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cda/dynamics.hpp"
#include "cda/hamiltonian.hpp"
#include "cda/quadrature.hpp"

namespace cda::analysis {

struct GroundStateReport {
  Eigen::Index eigen_index = 0;
  cplx eigenvalue;
  double gap = 0.0;  // max(0, -Re E)
  Eigen::Index pmp_index = 0;
  double sigma_z = 0.0;               // unit-normalized right vector
  double sigma_z_biorthogonal = 0.0;  // Re <L|sigma_z|R> / <L|R>
};

/// Index of the minimal real part, ties broken by the most negative imaginary part.
Eigen::Index ground_index(const CVector& values);

/// Single-sector report; sigma_z takes index 0 as the spin-excited state.
GroundStateReport ground_state(const dynamics::Spectrum& spec);

/// Same report from eigenvalues plus inverse iteration for the two vectors,
/// avoiding the full eigenvector matrix. The eigenvalues are returned through
/// `values` when given.
GroundStateReport ground_state(const hamiltonian::EffectiveHamiltonian& h,
                               CVector* values = nullptr);

enum class Region { Delocalized = 1, Localized = 2, Intermediate = 3 };

std::string to_string(Region r);

/// I when the gap is closed, II when the spin state carries the maximal
/// population, III otherwise.
Region classify_region(double gap, Eigen::Index pmp_index, double gap_tol);

struct PhasePoint {
  double s = 0.0;
  double eta = 0.0;
  Region region = Region::Delocalized;
  double gap = 0.0;
  Eigen::Index pmp_index = 0;
  double sigma_z = 0.0;
  double sigma_z_biorthogonal = 0.0;
};

struct ScanConfig {
  spectral::ModelParams base;  // s and eta are overridden per point
  hamiltonian::Coupling coupling = hamiltonian::Coupling::Conjugated;
  double gap_tol = 1e-8;  // in units of delta
  int refine_steps = 0;   // bisection steps between bracketing grid points
  int jobs = 1;
};

struct ScanResult {
  double s = 0.0;
  std::optional<double> eta_I;
  std::optional<double> eta_II;
  std::vector<PhasePoint> points;
  std::vector<std::string> warnings;
};

PhasePoint evaluate_point(double s, double eta, const quadrature::QuadratureRule& rule,
                          const ScanConfig& config);

/// The rule depends only on (R, N, M), so one rule serves every (s, eta).
ScanResult scan_eta(double s, std::span<const double> eta_grid,
                    const quadrature::QuadratureRule& rule, const ScanConfig& config);

struct SensitivityRow {
  double radius = 0.0;
  int nodes = 0;
  std::optional<double> eta_I;
  std::optional<double> eta_II;
};

using RuleProvider = std::function<quadrature::QuadratureRule(const quadrature::ContourSpec&)>;

std::vector<SensitivityRow> rn_sensitivity(double s, std::span<const double> eta_grid,
                                           std::span<const double> radii,
                                           std::span<const int> nodes, const ScanConfig& config,
                                           const RuleProvider& provider = {});

struct StretchedFit {
  double A = 0.0;
  double B = 0.0;
  double beta = 0.0;
  double residual = 0.0;  // rms
  double t_lo = 0.0;
  double t_hi = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Last 60% of the time range, starting no earlier than `seam`.
std::pair<double, double> default_fit_window(const dynamics::Trajectory& traj, double seam = 0.0);

/// Least squares of B exp(-A t^beta) over t in [t_lo, t_hi] by damped
/// Gauss-Newton (Levenberg-Marquardt), started from the double-log line.
StretchedFit stretched_fit(const dynamics::Trajectory& traj, double t_lo, double t_hi);

}  // namespace cda::analysis
