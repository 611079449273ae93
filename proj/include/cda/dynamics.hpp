#pragma once

// Biorthogonal spectral decomposition and time evolution
//
//     |psi(t)> = sum_n exp(-i E_n t) |n_R> <n_L|psi(0)>.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cda/hamiltonian.hpp"
#include "cda/types.hpp"

namespace cda::dynamics {

struct Spectrum {
  CVector values;
  CMatrix right;  // columns |n_R>
  CMatrix left;   // rows <n_L|, left * right = I
  bool hermitian = false;
  double condition = 1.0;  // 1-norm condition estimate of `right`
  std::optional<std::string> warning;

  Eigen::Index dim() const { return values.size(); }
  double max_imag() const;
  double biorthogonality_residual() const;
  double completeness_residual() const;
};

inline constexpr double kConditionWarning = 1e12;

/// General (zgeev + LU inverse) for non-Hermitian variants, zheevd for
/// hermitianized and real-space ones.
Spectrum diagonalize(const hamiltonian::EffectiveHamiltonian& h);
Spectrum diagonalize(const CMatrix& m, bool hermitian);

/// Spectrum of sqrt(H^dag H) read directly off the eigendecomposition of
/// H^dag H, without forming the square root.
Spectrum hermitianized_spectrum(const hamiltonian::EffectiveHamiltonian& h);

struct Trajectory {
  std::vector<double> times;
  std::vector<double> values;
  std::string label;
};

struct ComplexTrajectory {
  std::vector<double> times;
  std::vector<cplx> values;
  std::string label;
};

/// 0, dt, 2 dt, ..., t_max (the last point is included when it falls on the grid).
std::vector<double> uniform_grid(double t_max, double dt);

/// Throws NumericalError when some Im E_n exceeds `tol`.
void check_contractive(const Spectrum& spec, double tol = 1e-9);

CVector evolve(const Spectrum& spec, const CVector& psi0, double t);

/// Component `index` of |psi(t)>, or the overlap <psi0|psi(t)> when
/// index is negative.
ComplexTrajectory propagate(const Spectrum& spec, const CVector& psi0,
                            std::span<const double> times, Eigen::Index index = -1,
                            double im_tol = 1e-9);

/// |<psi0|psi(t)>|^2, not renormalized.
Trajectory survival_probability(const Spectrum& spec, const CVector& psi0,
                                std::span<const double> times);

struct BlendedSurvival {
  Trajectory trajectory;
  double t_switch = 4.0;
  double seam_jump = 0.0;  // |P_tilde - P| at the first grid point >= t_switch
};

BlendedSurvival blended_survival(const Spectrum& h, const Spectrum& h_tilde, const CVector& psi0,
                                 std::span<const double> times, double t_switch = 4.0);

/// |e>|0...0>, index 0 of the single sector.
CVector spin_excited_state(Eigen::Index dim);

/// (1/sqrt N) |e> sum_k a+_k |0> in the double sector.
CVector uniform_double_state(std::size_t modes);

struct DoubleObservables {
  Trajectory pe;    // sum_k |alpha_k(t)|^2 over the |e> a+_k block
  Trajectory norm;  // <psi(t)|psi(t)> on every `norm_stride`-th time
};

DoubleObservables pe_double(const Spectrum& spec, const CVector& psi0, std::size_t modes,
                            std::span<const double> times, std::size_t norm_stride = 0);

/// Header then one row per time, 17 significant digits.
void write_csv(const std::filesystem::path& path, const Trajectory& traj);
void write_csv(const std::filesystem::path& path, const ComplexTrajectory& traj);
Trajectory read_csv(const std::filesystem::path& path);

}  // namespace cda::dynamics
