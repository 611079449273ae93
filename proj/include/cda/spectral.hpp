#pragma once

// Ohmic-family bath: parameters, spectral density J(w), memory kernel and
// the analytic chain functions h(z), g(z) used by the contour discretization.
// Everything is expressed in units of the spin splitting.

#include <string>

#include "cda/types.hpp"

namespace cda::spectral {

struct ModelParams {
  double delta = 1.0;    // spin splitting
  double s = 1.0;        // Ohmicity exponent
  double eta = 0.1;      // coupling strength
  double omega_c = 10.0; // cutoff frequency

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

enum class BathClass { SubOhmic, Ohmic, SuperOhmic };

BathClass classify(const ModelParams& p);
std::string to_string(BathClass c);

/// J(w) = eta w (w/wc)^(s-1) exp(-w/wc). At s = 0, w = 0 returns the limit eta.
double spectral_density(double omega, const ModelParams& p);

/// Closed form of int_0^inf J(w) dw = eta wc^2 Gamma(s+1).
double spectral_integral(const ModelParams& p);

/// K(tau) = int_0^inf J(w) exp(-i w tau) dw = eta wc^2 Gamma(s+1) / (1 + i wc tau)^(s+1).
cplx memory_kernel(double tau, const ModelParams& p);

struct CouplingThreshold {
  double eta_c = 0.0;
  /// s = 0: int J/w diverges, so a bound state exists for every eta > 0.
  bool bound_for_any_eta = false;
};

/// eta_c = delta / (wc Gamma(s)); a bound state exists iff eta > eta_c.
CouplingThreshold coupling_threshold(const ModelParams& p);

/// h(z) = wc z.
cplx h_of_z(cplx z, const ModelParams& p);

/// g(z) = sqrt(eta) wc z^(s/2) exp(-z/2), principal branch.
cplx g_of_z(cplx z, const ModelParams& p);

}  // namespace cda::spectral
