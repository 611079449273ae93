#pragma once

// Effective Hamiltonians of the discretized bath in the single- and
// double-excitation sectors.

#include <filesystem>
#include <string>
#include <vector>

#include "cda/quadrature.hpp"
#include "cda/spectral.hpp"
#include "cda/types.hpp"

namespace cda::hamiltonian {

struct BathModes {
  std::vector<cplx> energies;   // h(z_i) = wc z_i
  std::vector<cplx> couplings;  // sqrt(i z_i / w(z_i)) sqrt(w_i) g(z_i)
  quadrature::RuleKind kind = quadrature::RuleKind::ComplexContour;

  std::size_t size() const { return energies.size(); }
};

/// Complex-contour rules use the formula above; real-axis rules (weight
/// x^s e^{-x}) give the chain couplings sqrt(eta w_i) wc directly.
BathModes bath_modes(const quadrature::QuadratureRule& rule, const spectral::ModelParams& p,
                     const quadrature::WeightFn& weight = quadrature::unit_weight);

enum class Sector { Single, Double };

/// How the reverse (bath -> spin) amplitude is read from "g sigma+ d + h.c.":
/// conjugated gives H(k,0) = conj(g_k), symmetric gives H(k,0) = g_k.
enum class Coupling { Conjugated, Symmetric };

enum class Variant { ConjugatedCoupling, SymmetricCoupling, Hermitianized, RealSpace };

std::string to_string(Sector s);
std::string to_string(Coupling c);
std::string to_string(Variant v);
Coupling parse_coupling(const std::string& text);

struct BasisState {
  bool spin_excited = false;
  int mode_a = -1;  // -1: no boson
  int mode_b = -1;  // second boson (double sector), mode_a <= mode_b

  std::string label() const;
};

struct EffectiveHamiltonian {
  CMatrix matrix;
  Sector sector = Sector::Single;
  Variant variant = Variant::ConjugatedCoupling;
  std::size_t modes = 0;
  std::vector<BasisState> basis;

  Eigen::Index dim() const { return matrix.rows(); }
  bool is_hermitian_variant() const;
};

/// Basis: 0 -> |e>|0>, k -> |g>|1>_k. Entries (0,0) = delta, (k,k) = z_k,
/// (0,k) = g_k and (k,0) per coupling reading.
EffectiveHamiltonian build_single(const BathModes& bath, const spectral::ModelParams& p,
                                  Coupling coupling = Coupling::Conjugated);

/// sqrt(H^dag H) via the Hermitian eigendecomposition of H^dag H.
/// Throws NumericalError when H^dag H has an eigenvalue below -1e-10 (relative).
EffectiveHamiltonian hermitianize(const EffectiveHamiltonian& h);

inline constexpr std::size_t kDefaultMaxDoubleDim = 6000;

std::size_t double_sector_dimension(std::size_t modes);

/// Index of |g> a+_a a+_b |0> (a <= b) in the double-sector basis.
std::size_t double_pair_index(std::size_t modes, std::size_t a, std::size_t b);

/// Basis {|e> a+_k |0>}_k followed by {|g> a+_k a+_k' |0>}_{k <= k'} with
/// unit-normalized occupation states; the sqrt(2) of double occupation lives
/// in the matrix elements.
EffectiveHamiltonian build_double(const BathModes& bath, const spectral::ModelParams& p,
                                  Coupling coupling = Coupling::Conjugated,
                                  std::size_t max_dim = kDefaultMaxDoubleDim);

/// Debug dump: one JSON header line then rows*cols little-endian
/// (re, im) float64 pairs in row-major order.
void write_matrix_dump(const std::filesystem::path& path, const EffectiveHamiltonian& h);
CMatrix read_matrix_dump(const std::filesystem::path& path, std::string* header_json = nullptr);

}  // namespace cda::hamiltonian
