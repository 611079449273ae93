#pragma once

// Run configuration: a flat INI-style file ("[section]" headers, "key = value"
// lines, '#' or ';' comments) plus "section.key=value" overrides.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cda/hamiltonian.hpp"
#include "cda/quadrature.hpp"
#include "cda/spectral.hpp"

namespace cda::config {

struct Entry {
  std::string value;
  std::string origin;  // "file:line" or "--set"
};

/// Raw "section.key" -> value map with source locations.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text, const std::string& source);
  static KeyValues load(const std::filesystem::path& path);

  /// "section.key=value"; the key must name a known setting.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value, const std::string& origin);

  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
};

enum class RuleSource { Complex, Real };

/// How the single-sector survival is propagated: H_dis, sqrt(H^dag H), the
/// H_dis -> sqrt(H^dag H) blend at t_switch, or auto (blend only for s = 1).
enum class Propagator { Dis, Tilde, Blend, Auto };

struct TimeGrid {
  double t_max = 20.0;
  double dt = 0.01;
};

struct RunConfig {
  spectral::ModelParams model;
  std::vector<double> s_values{1.0};
  std::vector<double> eta_values{0.1};
  std::vector<std::pair<double, double>> pairs;  // explicit (s, eta) points

  /// Explicit pairs when given, else the product s_values x eta_values.
  std::vector<std::pair<double, double>> parameter_points() const;

  quadrature::ContourSpec contour;
  std::vector<int> node_values{2000};
  RuleSource rule = RuleSource::Complex;

  std::vector<hamiltonian::Coupling> couplings{hamiltonian::Coupling::Conjugated};
  std::size_t max_dim = hamiltonian::kDefaultMaxDoubleDim;
  bool dump_matrix = false;

  TimeGrid times;
  TimeGrid exact_times{10.0, 1e-4};

  Propagator propagator = Propagator::Auto;
  double t_switch = 4.0;
  bool compare_exact = true;
  bool compute_exact = false;

  double eta_start = 0.0;
  double eta_stop = 0.0;
  double eta_step = 0.0;
  double gap_tol = 1e-8;
  int refine_steps = 0;
  bool sensitivity = false;
  std::vector<double> radii{6.0};

  Propagator double_companion = Propagator::Auto;
  double double_t_max = 8.0;

  std::optional<std::filesystem::path> fit_input;
  std::optional<double> fit_t_lo;
  std::optional<double> fit_t_hi;
  double fit_seam = 0.0;

  std::filesystem::path output_dir = "out";
  bool cache = true;
  int jobs = 1;

  /// eta grid for phase scans: eta_start..eta_stop by eta_step, or eta_values.
  std::vector<double> phase_eta_grid() const;
};

/// Every accepted "section.key".
const std::vector<std::string>& known_keys();

/// Validates types and ranges; unknown keys are rejected with their origin.
RunConfig build(const KeyValues& kv);

RunConfig load(const std::optional<std::filesystem::path>& path,
               const std::vector<std::string>& overrides);

std::string to_string(Propagator p);

}  // namespace cda::config
