#include "cda/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace cda::spectral {

void ModelParams::validate() const {
  if (!(delta > 0.0)) throw ConfigError("model.delta must be > 0");
  if (!(s >= 0.0)) throw ConfigError("model.s must be >= 0");
  if (!(eta >= 0.0)) throw ConfigError("model.eta must be >= 0");
  if (!(omega_c > 0.0)) throw ConfigError("model.omega_c must be > 0");
}

BathClass classify(const ModelParams& p) {
  if (p.s < 1.0) return BathClass::SubOhmic;
  if (p.s == 1.0) return BathClass::Ohmic;
  return BathClass::SuperOhmic;
}

std::string to_string(BathClass c) {
  switch (c) {
    case BathClass::SubOhmic: return "sub-Ohmic";
    case BathClass::Ohmic: return "Ohmic";
    case BathClass::SuperOhmic: return "super-Ohmic";
  }
  return "unknown";
}

double spectral_density(double omega, const ModelParams& p) {
  if (omega < 0.0) throw std::domain_error("spectral_density: omega must be >= 0");
  const double x = omega / p.omega_c;
  // eta w (w/wc)^(s-1) == eta wc x^s, which is finite at w = 0 for s = 0.
  return p.eta * p.omega_c * std::pow(x, p.s) * std::exp(-x);
}

double spectral_integral(const ModelParams& p) {
  return p.eta * p.omega_c * p.omega_c * std::tgamma(p.s + 1.0);
}

cplx memory_kernel(double tau, const ModelParams& p) {
  if (tau < 0.0) throw std::domain_error("memory_kernel: tau must be >= 0");
  const cplx base{1.0, p.omega_c * tau};
  return spectral_integral(p) * std::pow(base, -(p.s + 1.0));
}

CouplingThreshold coupling_threshold(const ModelParams& p) {
  if (p.s <= 0.0) return {0.0, true};
  return {p.delta / (p.omega_c * std::tgamma(p.s)), false};
}

cplx h_of_z(cplx z, const ModelParams& p) { return p.omega_c * z; }

cplx g_of_z(cplx z, const ModelParams& p) {
  if (z == cplx{}) return p.s == 0.0 ? cplx{std::sqrt(p.eta) * p.omega_c} : cplx{};
  return std::sqrt(p.eta) * p.omega_c * std::pow(z, 0.5 * p.s) * std::exp(-0.5 * z);
}

}  // namespace cda::spectral
