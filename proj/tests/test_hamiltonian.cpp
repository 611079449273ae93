#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "cda/dynamics.hpp"
#include "cda/hamiltonian.hpp"
#include "cda/linalg.hpp"
#include "cda/quadrature.hpp"

using namespace cda;
using namespace cda::hamiltonian;

namespace {

spectral::ModelParams params(double s, double eta) {
  spectral::ModelParams p;
  p.s = s;
  p.eta = eta;
  return p;
}

const quadrature::QuadratureRule& rule(int n) {
  static std::map<int, quadrature::QuadratureRule> rules;
  auto it = rules.find(n);
  if (it == rules.end()) {
    quadrature::ContourSpec spec;
    spec.nodes = n;
    it = rules.emplace(n, quadrature::contour_rule(spec, 10.0)).first;
  }
  return it->second;
}

std::vector<cplx> sorted_eigenvalues(const CMatrix& m) {
  const CVector v = linalg::eigvals(m);
  std::vector<cplx> out(v.begin(), v.end());
  std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

}  // namespace

TEST_CASE("bath modes from the contour rule") {
  const auto p = params(0.2, 0.1);
  const auto& r = rule(16);
  const auto bath = bath_modes(r, p);
  REQUIRE(bath.size() == 16);
  for (std::size_t i = 0; i < bath.size(); ++i) {
    const cplx z = r.variable(i);
    CHECK(std::abs(bath.energies[i] - 10.0 * z) < 1e-12 * std::abs(bath.energies[i]));
    const cplx g = spectral::g_of_z(z, p);
    const cplx expected_sq = kI * z * r.weights[i] * g * g;
    CHECK(std::abs(bath.couplings[i] * bath.couplings[i] - expected_sq) < 1e-12 * std::abs(expected_sq));
    CHECK(std::isfinite(std::abs(bath.couplings[i])));
    CHECK(std::abs(bath.couplings[i]) > 0.0);
  }
  const auto weak = bath_modes(r, params(0.2, 1e-6));
  const auto weaker = bath_modes(r, params(0.2, 1e-8));
  for (std::size_t i = 0; i < bath.size(); ++i) {
    CHECK(std::abs(weaker.couplings[i] / weak.couplings[i] - 0.1) < 1e-12);
  }
  CHECK_THROWS_AS(bath_modes(r, p, [](cplx) { return cplx{}; }), NumericalError);
}

TEST_CASE("real-axis couplings carry the full spectral weight") {
  for (double s : {0.0, 0.2, 1.0}) {
    const auto p = params(s, 0.3);
    const auto bath = bath_modes(quadrature::real_space_rule(p, 200), p);
    double total = 0.0;
    for (const cplx g : bath.couplings) {
      CHECK(g.imag() == 0.0);
      CHECK(g.real() >= 0.0);  // far nodes underflow to zero weight
      total += std::norm(g);
    }
    CHECK(total == doctest::Approx(spectral::spectral_integral(p)).epsilon(1e-3));
  }
}

TEST_CASE("single sector layout") {
  const auto p = params(1, 0.5);
  const auto bath = bath_modes(rule(8), p);
  const auto h = build_single(bath, p, Coupling::Conjugated);
  REQUIRE(h.dim() == 9);
  CHECK(h.sector == Sector::Single);
  CHECK(h.variant == Variant::ConjugatedCoupling);
  CHECK(h.matrix(0, 0) == cplx(1.0));
  CHECK(h.basis[0].spin_excited);
  CHECK(h.basis[0].label() == "e");
  CHECK(h.basis[3].label() == "g,a3");
  for (Eigen::Index k = 1; k < 9; ++k) {
    CHECK(h.matrix(k, k) == bath.energies[k - 1]);
    CHECK(h.matrix(0, k) == bath.couplings[k - 1]);
    CHECK(h.matrix(k, 0) == std::conj(bath.couplings[k - 1]));
  }
  const auto sym = build_single(bath, p, Coupling::Symmetric);
  CHECK(sym.variant == Variant::SymmetricCoupling);
  CHECK(sym.matrix == sym.matrix.transpose());
  CHECK(parse_coupling("symmetric") == Coupling::Symmetric);
  CHECK_THROWS_AS(parse_coupling("other"), ConfigError);
}

TEST_CASE("decoupled limit") {
  const auto p = params(0.2, 0.0);
  const auto h = build_single(bath_modes(rule(8), p), p, Coupling::Conjugated);
  CHECK(h.matrix.row(0).tail(8).cwiseAbs().maxCoeff() == 0.0);
  CHECK(h.matrix.col(0).tail(8).cwiseAbs().maxCoeff() == 0.0);
  const auto values = linalg::eigvals(h.matrix);
  bool found = false;
  for (const cplx e : values) found = found || e == cplx(1.0);
  CHECK(found);
}

TEST_CASE("two-level closed form") {
  const auto p = params(1, 0.5);
  BathModes bath;
  bath.kind = quadrature::RuleKind::ComplexContour;
  bath.energies = {cplx(3.0, -0.4)};
  bath.couplings = {cplx(0.7, 0.2)};
  for (const auto c : {Coupling::Conjugated, Coupling::Symmetric}) {
    const auto h = build_single(bath, p, c);
    const cplx z = bath.energies[0], g = bath.couplings[0];
    const cplx gg = c == Coupling::Conjugated ? g * std::conj(g) : g * g;
    const cplx root = std::sqrt((1.0 - z) * (1.0 - z) / 4.0 + gg);
    std::vector<cplx> expect = {(1.0 + z) / 2.0 - root, (1.0 + z) / 2.0 + root};
    std::sort(expect.begin(), expect.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    const auto got = sorted_eigenvalues(h.matrix);
    CHECK(std::abs(got[0] - expect[0]) < 1e-12);
    CHECK(std::abs(got[1] - expect[1]) < 1e-12);
  }
}

TEST_CASE("hermitianize") {
  EffectiveHamiltonian one;
  one.matrix = CMatrix::Constant(1, 1, cplx(0, -1));
  CHECK(std::abs(hermitianize(one).matrix(0, 0) - 1.0) < 1e-15);

  CMatrix a = CMatrix::Random(6, 6);
  EffectiveHamiltonian psd;
  psd.matrix = a * a.adjoint();
  CHECK((hermitianize(psd).matrix - psd.matrix).norm() < 1e-10 * psd.matrix.norm());

  const auto p = params(1, 0.5);
  const auto h = build_single(bath_modes(rule(32), p), p, Coupling::Conjugated);
  const auto ht = hermitianize(h);
  CHECK(ht.variant == Variant::Hermitianized);
  CHECK(ht.is_hermitian_variant());
  CHECK((ht.matrix - ht.matrix.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  const CMatrix gram = h.matrix.adjoint() * h.matrix;
  CHECK((ht.matrix * ht.matrix - gram).norm() < 1e-8 * gram.norm());
  CHECK((hermitianize(ht).matrix - ht.matrix).norm() < 1e-10 * ht.matrix.norm());
}

TEST_CASE("double sector indexing") {
  for (std::size_t n : {1u, 2u, 5u, 12u}) {
    CHECK(double_sector_dimension(n) == n + n * (n + 1) / 2);
    std::set<std::size_t> seen;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a; b < n; ++b) {
        const auto j = double_pair_index(n, a, b);
        CHECK(j >= n);
        CHECK(j < double_sector_dimension(n));
        CHECK(j == double_pair_index(n, b, a));
        seen.insert(j);
      }
    }
    CHECK(seen.size() == n * (n + 1) / 2);
  }
  CHECK(double_sector_dimension(200) == 20300);
  CHECK(double_sector_dimension(100) == 5150);
}

TEST_CASE("double sector single mode") {
  const auto p = params(1, 0.5);
  BathModes bath;
  bath.kind = quadrature::RuleKind::ComplexContour;
  bath.energies = {cplx(2.0, -0.1)};
  bath.couplings = {cplx(0.3, 0.1)};
  const auto h = build_double(bath, p, Coupling::Conjugated);
  REQUIRE(h.dim() == 2);
  CHECK(h.matrix(0, 0) == 1.0 + bath.energies[0]);
  CHECK(h.matrix(1, 1) == 2.0 * bath.energies[0]);
  CHECK(std::abs(h.matrix(0, 1) - std::sqrt(2.0) * bath.couplings[0]) < 1e-15);
  CHECK(std::abs(h.matrix(1, 0) - std::sqrt(2.0) * std::conj(bath.couplings[0])) < 1e-15);
  CHECK(h.basis[1].label() == "g,a1,a1");
}

TEST_CASE("double sector decoupled spectrum and guard rail") {
  const auto p = params(0.2, 0.0);
  const auto bath = bath_modes(rule(6), p);
  const auto h = build_double(bath, p, Coupling::Conjugated);
  std::vector<cplx> expect;
  for (std::size_t k = 0; k < 6; ++k) expect.push_back(1.0 + bath.energies[k]);
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = a; b < 6; ++b) expect.push_back(bath.energies[a] + bath.energies[b]);
  const auto got = sorted_eigenvalues(h.matrix);
  REQUIRE(got.size() == expect.size());
  for (const cplx e : expect) {
    double best = 1e300;
    for (const cplx g : got) best = std::min(best, std::abs(g - e));
    CHECK(best < 1e-12 * std::max(1.0, std::abs(e)));
  }
  CHECK_THROWS_AS(build_double(bath_modes(rule(16), p), p, Coupling::Conjugated, 100), ConfigError);
}

TEST_CASE("spectrum invariants over an (s, eta) grid") {
  const auto& r = rule(100);
  for (double s : {0.0, 0.2, 0.5, 1.0}) {
    for (double eta : {0.01, 0.05, 0.1, 0.5}) {
      const auto p = params(s, eta);
      const auto h = build_single(bath_modes(r, p), p, Coupling::Conjugated);
      const auto values = linalg::eigvals(h.matrix);
      CAPTURE(s);
      CAPTURE(eta);
      int negative = 0;
      for (const cplx e : values) {
        CHECK(e.imag() <= 1e-9);
        CHECK(e.real() < 120.0);
        if (e.real() <= 0.0) ++negative;
      }
      CHECK(negative <= 1);
    }
  }
}

TEST_CASE("matrix dump round trip") {
  const auto p = params(1, 0.5);
  const auto h = build_single(bath_modes(rule(8), p), p, Coupling::Conjugated);
  const auto path = std::filesystem::temp_directory_path() / "cda_dump_test.bin";
  write_matrix_dump(path, h);
  std::string header;
  const CMatrix back = read_matrix_dump(path, &header);
  CHECK(back == h.matrix);
  CHECK(header.find("\"rows\":9") != std::string::npos);
  std::filesystem::remove(path);
}
