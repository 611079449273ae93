#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "cda/dynamics.hpp"
#include "cda/exact.hpp"
#include "cda/quadrature.hpp"

using namespace cda;
using namespace cda::dynamics;

namespace {

spectral::ModelParams params(double s, double eta) {
  spectral::ModelParams p;
  p.s = s;
  p.eta = eta;
  return p;
}

hamiltonian::EffectiveHamiltonian single(double s, double eta, int n) {
  static std::map<int, quadrature::QuadratureRule> rules;
  auto it = rules.find(n);
  if (it == rules.end()) {
    quadrature::ContourSpec spec;
    spec.nodes = n;
    it = rules.emplace(n, quadrature::contour_rule(spec, 10.0)).first;
  }
  const auto p = params(s, eta);
  return hamiltonian::build_single(hamiltonian::bath_modes(it->second, p), p,
                                   hamiltonian::Coupling::Conjugated);
}

double mean_over(const Trajectory& t, double lo, double hi) {
  double acc = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    if (t.times[i] >= lo - 1e-12 && t.times[i] <= hi + 1e-12) {
      acc += t.values[i];
      ++count;
    }
  }
  return acc / count;
}

}  // namespace

TEST_CASE("hermitian diagonalization") {
  CMatrix a = CMatrix::Random(5, 5);
  const CMatrix h = a + a.adjoint();
  const auto spec = diagonalize(h, true);
  CHECK(spec.hermitian);
  CHECK(spec.values.imag().cwiseAbs().maxCoeff() == 0.0);
  CHECK((spec.left - spec.right.adjoint()).norm() == 0.0);
  CHECK(spec.biorthogonality_residual() < 1e-12);
}

TEST_CASE("two-by-two non-hermitian eigenpairs") {
  CMatrix h(2, 2);
  h << cplx(1, 0), cplx(0.5, 0.2), cplx(0.3, -0.1), cplx(2, -0.5);
  const auto spec = diagonalize(h, false);
  const cplx tr = h.trace(), det = h.determinant();
  const cplx root = std::sqrt(tr * tr / 4.0 - det);
  for (Eigen::Index n = 0; n < 2; ++n) {
    const cplx e = spec.values[n];
    CHECK(std::min(std::abs(e - (tr / 2.0 + root)), std::abs(e - (tr / 2.0 - root))) < 1e-12);
    CHECK((h * spec.right.col(n) - e * spec.right.col(n)).norm() < 1e-12);
    CHECK((spec.left.row(n) * h - e * spec.left.row(n)).norm() < 1e-12);
  }
  CHECK(spec.biorthogonality_residual() < 1e-12);
  CHECK(spec.completeness_residual() < 1e-12);
  CHECK_FALSE(spec.warning.has_value());
}

TEST_CASE("ill-conditioned eigenvectors are flagged") {
  CMatrix h(2, 2);
  h << cplx(1, 0), cplx(1, 0), cplx(1e-30, 0), cplx(1, 0);
  const auto spec = diagonalize(h, false);
  CHECK(spec.warning.has_value());
}

TEST_CASE("biorthogonal pairing of an effective hamiltonian") {
  const auto spec = diagonalize(single(0.2, 0.1, 200));
  CHECK(spec.max_imag() <= 1e-9);
  CHECK(spec.biorthogonality_residual() < 1e-8);
  CHECK(spec.completeness_residual() < 1e-6);
  for (double t : {0.0, 1.0, 10.0, 100.0}) {
    for (Eigen::Index n = 0; n < spec.dim(); ++n) CHECK(std::abs(std::exp(-kI * spec.values[n] * t)) <= 1.0 + 1e-12);
  }
  const CVector psi0 = spin_excited_state(spec.dim());
  CHECK((evolve(spec, psi0, 0.0) - psi0).norm() < 1e-8);
}

TEST_CASE("decoupled spin") {
  const auto h = single(1.0, 0.0, 16);
  const auto spec = diagonalize(h);
  const auto times = uniform_grid(10.0, 0.5);
  const CVector psi0 = spin_excited_state(h.dim());
  const auto amp = propagate(spec, psi0, times, 0);
  for (std::size_t j = 0; j < times.size(); ++j) {
    CHECK(std::abs(amp.values[j] - std::exp(-kI * times[j])) < 1e-10);
  }
  for (const double v : survival_probability(spec, psi0, times).values) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("growing modes are rejected") {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = cplx(0, 0.1);
  h(1, 1) = 1.0;
  const auto spec = diagonalize(h, false);
  const std::vector<double> t{0.0, 1.0};
  CHECK_THROWS_AS(propagate(spec, spin_excited_state(2), t), NumericalError);
  CHECK_THROWS_AS(propagate(spec, spin_excited_state(3), t), ConfigError);
}

TEST_CASE("survival regimes") {
  const auto times = uniform_grid(10.0, 0.05);
  const auto fast = survival_probability(diagonalize(single(1.0, 0.05, 400)),
                                         spin_excited_state(401), times);
  CHECK(fast.values.front() == doctest::Approx(1.0).epsilon(1e-8));
  for (std::size_t i = 1; i < fast.values.size(); ++i) CHECK(fast.values[i] <= fast.values[i - 1] + 1e-6);
  const auto reference = exact::survival_from_alpha(exact::volterra_alpha(params(1.0, 0.05), 10.0, 1e-3), 50);
  CHECK(exact::error_metric(fast, reference).sup_abs(0.0, 10.0) < 1e-2);
  CHECK(fast.values.back() < 0.3);

  // s = 0 has a bound state for every eta: the survival localizes
  const auto p = params(0.0, 0.1);
  const auto eb = exact::bound_state_energy(p);
  REQUIRE(eb.has_value());
  const double plateau = exact::bound_state_residue(p, *eb).plateau;
  const auto loc = survival_probability(diagonalize(single(0.0, 0.1, 400)), spin_excited_state(401),
                                        uniform_grid(20.0, 0.05));
  const double level = mean_over(loc, 15.0, 20.0);
  MESSAGE("s=0 eta=0.1 late mean " << level << " vs pole plateau " << plateau);
  CHECK(level > 0.1);
  CHECK(std::abs(level - plateau) < 0.05);
}

TEST_CASE("blended survival limits") {
  const auto h = single(1.0, 0.5, 100);
  const auto spec = diagonalize(h);
  const auto tilde = hermitianized_spectrum(h);
  const CVector psi0 = spin_excited_state(h.dim());
  const auto times = uniform_grid(6.0, 0.1);
  const auto pure_h = survival_probability(spec, psi0, times);
  const auto pure_t = survival_probability(tilde, psi0, times);
  const auto never = blended_survival(spec, tilde, psi0, times, 1e300);
  const auto always = blended_survival(spec, tilde, psi0, times, 0.0);
  const auto mid = blended_survival(spec, tilde, psi0, times, 3.0);
  for (std::size_t j = 0; j < times.size(); ++j) {
    CHECK(never.trajectory.values[j] == pure_h.values[j]);
    CHECK(always.trajectory.values[j] == pure_t.values[j]);
    CHECK(mid.trajectory.values[j] == (times[j] < 3.0 ? pure_h.values[j] : pure_t.values[j]));
  }
  CHECK(mid.seam_jump == doctest::Approx(std::abs(pure_t.values[30] - pure_h.values[30])));
}

TEST_CASE("hermitianized spectrum matches the explicit square root") {
  const auto h = single(1.0, 0.5, 40);
  const auto direct = hermitianized_spectrum(h);
  const auto explicit_root = diagonalize(hamiltonian::hermitianize(h));
  CHECK(direct.hermitian);
  for (Eigen::Index n = 0; n < direct.dim(); ++n) {
    CHECK(direct.values[n].real() >= 0.0);
    CHECK(std::abs(direct.values[n] - explicit_root.values[n]) < 1e-9 * std::max(1.0, std::abs(direct.values[n])));
  }
}

TEST_CASE("hermitian evolution conserves the norm") {
  const auto h = single(0.2, 0.1, 60);
  const auto spec = hermitianized_spectrum(h);
  const CVector psi0 = spin_excited_state(h.dim());
  for (double t = 0.0; t <= 100.0; t += 2.5) CHECK(std::abs(evolve(spec, psi0, t).squaredNorm() - 1.0) < 1e-10);
}

TEST_CASE("double sector excited population") {
  spectral::ModelParams p = params(0.2, 0.1);
  quadrature::ContourSpec cs;
  cs.nodes = 12;
  const auto bath = hamiltonian::bath_modes(quadrature::contour_rule(cs, 10.0), p);
  const auto hd = hamiltonian::build_double(bath, p, hamiltonian::Coupling::Conjugated);
  const auto spec = hermitianized_spectrum(hd);
  const CVector psi0 = uniform_double_state(bath.size());
  CHECK(psi0.norm() == doctest::Approx(1.0));
  const auto obs = pe_double(spec, psi0, bath.size(), uniform_grid(10.0, 0.05), 1);
  CHECK(obs.pe.values.front() == doctest::Approx(1.0).epsilon(1e-12));
  for (const double v : obs.pe.values) CHECK(v <= 1.0 + 1e-12);
  for (const double n : obs.norm.values) CHECK(std::abs(n - 1.0) < 1e-10);
}

TEST_CASE("time grid and csv round trip") {
  const auto g = uniform_grid(1.0, 0.1);
  REQUIRE(g.size() == 11);
  CHECK(g.back() == doctest::Approx(1.0));
  CHECK_THROWS_AS(uniform_grid(1.0, 0.0), ConfigError);

  Trajectory t;
  t.label = "survival";
  t.times = {0.0, 0.5, 1.0};
  t.values = {1.0, 0.123456789012345678, 1e-17};
  const auto dir = std::filesystem::temp_directory_path() / "cda_csv_test";
  write_csv(dir / "a.csv", t);
  const auto back = read_csv(dir / "a.csv");
  CHECK(back.label == "survival");
  CHECK(back.times == t.times);
  CHECK(back.values == t.values);

  std::ofstream(dir / "bad.csv") << "t,x\n0,1\n0,2\n";
  CHECK_THROWS_AS(read_csv(dir / "bad.csv"), ConfigError);
  std::ofstream(dir / "junk.csv") << "t,x\n0,abc\n";
  CHECK_THROWS_AS(read_csv(dir / "junk.csv"), ConfigError);
  std::filesystem::remove_all(dir);
}
