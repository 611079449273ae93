#include "cda/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace cda::exact {

dynamics::ComplexTrajectory volterra_alpha(const spectral::ModelParams& p, double t_max,
                                           double dt) {
  if (!(dt > 0.0)) throw ConfigError("volterra_alpha: dt must be > 0");
  if (!(t_max >= 0.0)) throw ConfigError("volterra_alpha: t_max must be >= 0");
  p.validate();
  const auto steps = static_cast<std::size_t>(std::llround(t_max / dt));

  std::vector<cplx> kernel(steps + 1);
  for (std::size_t j = 0; j <= steps; ++j) {
    kernel[j] = spectral::memory_kernel(static_cast<double>(j) * dt, p);
  }
  std::vector<cplx> alpha(steps + 1);
  alpha[0] = 1.0;

  const cplx spin = kI * p.delta;
  const double h = 0.5 * dt;
  const cplx denom = 1.0 + h * (spin + h * kernel[0]);
  cplx memory{};  // trapezoidal int_0^{t_n} K(t_n - tau) alpha(tau) dtau
  for (std::size_t n = 0; n < steps; ++n) {
    const cplx f_n = -spin * alpha[n] - memory;
    // history part of the memory integral at t_{n+1}, everything but alpha_{n+1}
    cplx history = 0.5 * kernel[n + 1] * alpha[0];
    for (std::size_t j = 1; j <= n; ++j) history += kernel[n + 1 - j] * alpha[j];
    history *= dt;
    alpha[n + 1] = (alpha[n] + h * f_n - h * history) / denom;
    memory = history + h * kernel[0] * alpha[n + 1];
    if (!std::isfinite(alpha[n + 1].real()) || !std::isfinite(alpha[n + 1].imag())) {
      throw NumericalError("volterra_alpha: solution diverged at step " + std::to_string(n + 1));
    }
  }

  dynamics::ComplexTrajectory out;
  out.label = "alpha";
  out.values = std::move(alpha);
  out.times.resize(steps + 1);
  for (std::size_t j = 0; j <= steps; ++j) out.times[j] = static_cast<double>(j) * dt;
  return out;
}

dynamics::Trajectory survival_from_alpha(const dynamics::ComplexTrajectory& alpha,
                                         std::size_t stride) {
  if (stride == 0) throw ConfigError("survival_from_alpha: stride must be >= 1");
  dynamics::Trajectory out;
  out.label = "survival";
  for (std::size_t j = 0; j < alpha.times.size(); j += stride) {
    out.times.push_back(alpha.times[j]);
    out.values.push_back(std::norm(alpha.values[j]));
  }
  return out;
}

namespace {

template <typename F>
double half_line_integral(F f) {
  thread_local boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, 1e-13);
}

}  // namespace

double bound_state_function(double energy, const spectral::ModelParams& p) {
  if (!(energy < 0.0)) throw std::domain_error("bound_state_function: energy must be < 0");
  const double integral = half_line_integral(
      [&](double w) { return spectral::spectral_density(w, p) / (energy - w); });
  return p.delta - energy + integral;
}

std::optional<double> bound_state_energy(const spectral::ModelParams& p) {
  p.validate();
  const auto threshold = spectral::coupling_threshold(p);
  if (!threshold.bound_for_any_eta && p.eta <= threshold.eta_c) return std::nullopt;

  // F decreases from +inf at E -> -inf to F(0-) < 0
  const double floor = -1e3 * p.delta;
  double lo = -p.delta;
  while (bound_state_function(lo, p) <= 0.0) {
    lo *= 2.0;
    if (lo < floor) throw NumericalError("bound_state_energy: no bracket within (-1e3 delta, 0)");
  }
  double hi = lo / 2.0;
  while (bound_state_function(hi, p) > 0.0) {
    if (hi > -1e-300) return std::nullopt;  // root indistinguishable from the edge
    hi /= 2.0;
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double f = bound_state_function(mid, p);
    if (std::abs(f) < 1e-10 && hi - lo < 1e-12 * std::abs(mid)) return mid;
    if (f > 0.0) lo = mid; else hi = mid;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * std::abs(mid)) return mid;
  }
  return 0.5 * (lo + hi);
}

cplx BoundState::asymptotic(double t) const { return residue * std::exp(-kI * energy * t); }

BoundState bound_state_residue(const spectral::ModelParams& p, double energy) {
  if (!(energy < 0.0)) throw ConfigError("bound_state_residue: energy must be < 0");
  const double integral = half_line_integral([&](double w) {
    const double d = energy - w;
    return spectral::spectral_density(w, p) / (d * d);
  });
  BoundState out;
  out.energy = energy;
  out.residue = -1.0 / (1.0 + integral);
  out.plateau = out.residue * out.residue;
  return out;
}

double ErrorSeries::sup_abs(double t_lo, double t_hi) const {
  double m = 0.0;
  for (std::size_t i = 0; i < error.times.size(); ++i) {
    if (error.times[i] >= t_lo && error.times[i] <= t_hi) m = std::max(m, std::abs(error.values[i]));
  }
  return m;
}

dynamics::Trajectory resample(const dynamics::Trajectory& traj, const std::vector<double>& times) {
  if (traj.times.empty()) throw ConfigError("resample: empty trajectory");
  const double slack = 1e-9 * std::max(1.0, std::abs(traj.times.back()));
  dynamics::Trajectory out;
  out.label = traj.label;
  out.times = times;
  out.values.reserve(times.size());
  for (const double t : times) {
    if (t < traj.times.front() - slack || t > traj.times.back() + slack) {
      throw ConfigError("resample: time " + std::to_string(t) + " outside the reference range");
    }
    const auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t);
    if (it == traj.times.begin()) { out.values.push_back(traj.values.front()); continue; }
    if (it == traj.times.end()) { out.values.push_back(traj.values.back()); continue; }
    const auto j = static_cast<std::size_t>(it - traj.times.begin());
    const double t0 = traj.times[j - 1], t1 = traj.times[j];
    const double u = (t - t0) / (t1 - t0);
    out.values.push_back((1.0 - u) * traj.values[j - 1] + u * traj.values[j]);
  }
  return out;
}

ErrorSeries error_metric(const dynamics::Trajectory& cda, const dynamics::Trajectory& reference) {
  const bool same_grid = cda.times.size() == reference.times.size() &&
                         std::equal(cda.times.begin(), cda.times.end(), reference.times.begin(),
                                    [](double a, double b) { return std::abs(a - b) <= 1e-12; });
  const auto ref = same_grid ? reference : resample(reference, cda.times);
  ErrorSeries out;
  out.error.label = "error";
  out.error.times = cda.times;
  out.flagged.resize(cda.times.size(), false);
  for (std::size_t i = 0; i < cda.times.size(); ++i) {
    const double a = cda.values[i], b = ref.values[i];
    if (a + b < 1e-12) {
      out.error.values.push_back(0.0);
      out.flagged[i] = true;
      ++out.flagged_count;
    } else {
      out.error.values.push_back((a - b) / (a + b));
    }
  }
  return out;
}

}  // namespace cda::exact
