#pragma once

// Write-once on-disk cache for contour rules and reference survival series.
// Rules are stored dimensionless (scale 1) and rescaled on load, so one entry
// serves every omega_c.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cda/dynamics.hpp"
#include "cda/quadrature.hpp"
#include "cda/spectral.hpp"

namespace cda::cache {

inline constexpr int kFormatVersion = 2;
inline constexpr const char* kDirectoryEnv = "CDA_CACHE_DIR";

/// $CDA_CACHE_DIR when set, else ./.cda-cache.
std::filesystem::path default_directory();

class Store {
 public:
  explicit Store(std::filesystem::path directory = default_directory(), bool enabled = true);

  const std::filesystem::path& directory() const { return dir_; }
  bool enabled() const { return enabled_; }

  std::filesystem::path rule_path(const quadrature::ContourSpec& spec,
                                  const std::string& weight_id = "unit") const;
  std::optional<quadrature::QuadratureRule> load_rule(const quadrature::ContourSpec& spec,
                                                      const std::string& weight_id = "unit") const;
  void store_rule(const quadrature::ContourSpec& spec, const quadrature::QuadratureRule& rule,
                  const std::string& weight_id = "unit") const;

  /// Cached (or freshly computed and stored) unit-weight rule in energy units.
  quadrature::QuadratureRule contour_rule(const quadrature::ContourSpec& spec, double omega_c,
                                          bool* hit = nullptr) const;

  std::filesystem::path exact_path(const spectral::ModelParams& p, double t_max, double dt,
                                   double dt_out) const;
  std::optional<dynamics::Trajectory> load_exact(const spectral::ModelParams& p, double t_max,
                                                 double dt, double dt_out) const;
  void store_exact(const spectral::ModelParams& p, double t_max, double dt, double dt_out,
                   const dynamics::Trajectory& survival) const;

  std::vector<std::filesystem::path> entries() const;
  std::size_t clear() const;

 private:
  std::filesystem::path dir_;
  bool enabled_;
};

}  // namespace cda::cache
