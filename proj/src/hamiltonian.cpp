#include "cda/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cda/linalg.hpp"

namespace cda::hamiltonian {

using quadrature::RuleKind;

BathModes bath_modes(const quadrature::QuadratureRule& rule, const spectral::ModelParams& p,
                     const quadrature::WeightFn& weight) {
  BathModes bath;
  bath.kind = rule.kind;
  bath.energies.reserve(rule.size());
  bath.couplings.reserve(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const cplx z = rule.variable(i);
    bath.energies.push_back(spectral::h_of_z(z, p));
    if (rule.kind == RuleKind::RealAxis) {
      // g(y)^2 / (y^s e^{-y}) = eta wc^2 for every node
      bath.couplings.push_back(std::sqrt(p.eta * rule.weights[i]) * p.omega_c);
      continue;
    }
    const cplx wz = weight(z);
    if (wz == cplx{}) {
      throw NumericalError("bath_modes: weight function vanishes at node " + std::to_string(i));
    }
    bath.couplings.push_back(std::sqrt(kI * z / wz) * std::sqrt(rule.weights[i]) *
                             spectral::g_of_z(z, p));
  }
  return bath;
}

std::string to_string(Sector s) { return s == Sector::Single ? "single" : "double"; }

std::string to_string(Coupling c) {
  return c == Coupling::Conjugated ? "conjugated" : "symmetric";
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::ConjugatedCoupling: return "conjugated-coupling";
    case Variant::SymmetricCoupling: return "symmetric-coupling";
    case Variant::Hermitianized: return "hermitianized";
    case Variant::RealSpace: return "real-space";
  }
  return "unknown";
}

Coupling parse_coupling(const std::string& text) {
  if (text == "conjugated" || text == "conjugated-coupling") return Coupling::Conjugated;
  if (text == "symmetric" || text == "symmetric-coupling") return Coupling::Symmetric;
  throw ConfigError("unknown coupling variant '" + text + "' (conjugated|symmetric)");
}

std::string BasisState::label() const {
  std::string out = spin_excited ? "e" : "g";
  if (mode_a >= 0) out += ",a" + std::to_string(mode_a + 1);
  if (mode_b >= 0) out += ",a" + std::to_string(mode_b + 1);
  return out;
}

bool EffectiveHamiltonian::is_hermitian_variant() const {
  // The chain couplings are real, so both readings give a Hermitian matrix.
  return variant == Variant::Hermitianized || variant == Variant::RealSpace;
}

namespace {

Variant variant_for(const BathModes& bath, Coupling coupling) {
  if (bath.kind == RuleKind::RealAxis) return Variant::RealSpace;
  return coupling == Coupling::Conjugated ? Variant::ConjugatedCoupling
                                          : Variant::SymmetricCoupling;
}

cplx reverse(cplx g, Coupling coupling) {
  return coupling == Coupling::Conjugated ? std::conj(g) : g;
}

}  // namespace

EffectiveHamiltonian build_single(const BathModes& bath, const spectral::ModelParams& p,
                                  Coupling coupling) {
  const auto n = static_cast<Eigen::Index>(bath.size());
  EffectiveHamiltonian h;
  h.sector = Sector::Single;
  h.variant = variant_for(bath, coupling);
  h.modes = bath.size();
  h.matrix = CMatrix::Zero(n + 1, n + 1);
  h.matrix(0, 0) = p.delta;
  h.basis.push_back({true, -1, -1});
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    h.matrix(k + 1, k + 1) = bath.energies[i];
    h.matrix(0, k + 1) = bath.couplings[i];
    h.matrix(k + 1, 0) = reverse(bath.couplings[i], coupling);
    h.basis.push_back({false, static_cast<int>(k), -1});
  }
  return h;
}

EffectiveHamiltonian hermitianize(const EffectiveHamiltonian& h) {
  const CMatrix gram = linalg::gram(h.matrix);
  const auto es = linalg::eigh(gram);
  const double top = es.values.size() > 0 ? std::max(1.0, es.values.maxCoeff()) : 1.0;
  Eigen::VectorXd roots(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    const double lambda = es.values[i];
    if (lambda < -1e-10 * top) {
      throw NumericalError("hermitianize: H^dag H has eigenvalue " + std::to_string(lambda));
    }
    roots[i] = std::sqrt(std::max(lambda, 0.0));
  }
  EffectiveHamiltonian out;
  out.sector = h.sector;
  out.variant = Variant::Hermitianized;
  out.modes = h.modes;
  out.basis = h.basis;
  const CMatrix scaled = es.vectors * roots.asDiagonal();
  out.matrix = scaled * es.vectors.adjoint();
  out.matrix = 0.5 * (out.matrix + out.matrix.adjoint()).eval();
  return out;
}

std::size_t double_sector_dimension(std::size_t modes) {
  return modes + modes * (modes + 1) / 2;
}

std::size_t double_pair_index(std::size_t modes, std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  // pairs (a, b >= a) are laid out row by row after the N spin-excited states
  return modes + a * modes - a * (a - 1) / 2 + (b - a);
}

EffectiveHamiltonian build_double(const BathModes& bath, const spectral::ModelParams& p,
                                  Coupling coupling, std::size_t max_dim) {
  const std::size_t n = bath.size();
  const std::size_t dim = double_sector_dimension(n);
  if (dim > max_dim) {
    throw ConfigError("double sector dimension " + std::to_string(dim) + " exceeds the cap " +
                      std::to_string(max_dim) + "; lower contour.nodes or raise double.max_dim");
  }
  EffectiveHamiltonian h;
  h.sector = Sector::Double;
  h.variant = variant_for(bath, coupling);
  h.modes = n;
  h.matrix = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  h.basis.resize(dim);

  const auto at = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
  for (std::size_t k = 0; k < n; ++k) {
    h.basis[k] = {true, static_cast<int>(k), -1};
    h.matrix(at(k), at(k)) = p.delta + bath.energies[k];
  }
  const double root2 = std::sqrt(2.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      const std::size_t j = double_pair_index(n, a, b);
      h.basis[j] = {false, static_cast<int>(a), static_cast<int>(b)};
      h.matrix(at(j), at(j)) = bath.energies[a] + bath.energies[b];
      if (a == b) {
        const cplx amp = root2 * bath.couplings[a];
        h.matrix(at(a), at(j)) = amp;
        h.matrix(at(j), at(a)) = reverse(amp, coupling);
      } else {
        // sigma+ d_b leaves |e> a+_a, sigma+ d_a leaves |e> a+_b
        h.matrix(at(a), at(j)) = bath.couplings[b];
        h.matrix(at(j), at(a)) = reverse(bath.couplings[b], coupling);
        h.matrix(at(b), at(j)) = bath.couplings[a];
        h.matrix(at(j), at(b)) = reverse(bath.couplings[a], coupling);
      }
    }
  }
  return h;
}

void write_matrix_dump(const std::filesystem::path& path, const EffectiveHamiltonian& h) {
  static_assert(std::endian::native == std::endian::little, "dump format is little-endian");
  nlohmann::json header = {
      {"format", "cda-matrix"}, {"version", 1},
      {"rows", h.matrix.rows()}, {"cols", h.matrix.cols()},
      {"sector", to_string(h.sector)}, {"variant", to_string(h.variant)},
      {"layout", "row-major complex128 little-endian"}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write matrix dump " + path.string());
  out << header.dump() << '\n';
  for (Eigen::Index r = 0; r < h.matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.matrix.cols(); ++c) {
      const double pair[2] = {h.matrix(r, c).real(), h.matrix(r, c).imag()};
      out.write(reinterpret_cast<const char*>(pair), sizeof(pair));
    }
  }
}

CMatrix read_matrix_dump(const std::filesystem::path& path, std::string* header_json) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read matrix dump " + path.string());
  std::string line;
  std::getline(in, line);
  const auto header = nlohmann::json::parse(line);
  if (header.value("format", "") != "cda-matrix" || header.value("version", 0) != 1) {
    throw ConfigError("unsupported matrix dump header in " + path.string());
  }
  if (header_json) *header_json = line;
  const auto rows = header.at("rows").get<Eigen::Index>();
  const auto cols = header.at("cols").get<Eigen::Index>();
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double pair[2];
      if (!in.read(reinterpret_cast<char*>(pair), sizeof(pair))) {
        throw ConfigError("truncated matrix dump " + path.string());
      }
      m(r, c) = {pair[0], pair[1]};
    }
  }
  return m;
}

}  // namespace cda::hamiltonian
