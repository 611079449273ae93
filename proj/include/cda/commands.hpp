#pragma once

// Subcommand implementations behind the `cda` executable. Each writes its
// files under RunConfig::output_dir and returns the paths it wrote.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cda/cache.hpp"
#include "cda/config.hpp"

namespace cda::commands {

using Written = std::vector<std::filesystem::path>;

struct Context {
  config::RunConfig config;
  cache::Store store;
  std::ostream& log;
};

/// alpha(t) and |alpha|^2 from the memory-kernel equation, plus the bound state.
Written run_exact(const Context& ctx);

/// Survival probability from the discretized bath; error series against the
/// cached reference when available.
Written run_cda(const Context& ctx);

/// Eigenvalues of H_dis and the ground-state report.
Written run_spectrum(const Context& ctx);

/// eta scans per s (phase diagram, PMP, sigma_z) and optional (R, N) table.
Written run_phase(const Context& ctx);

/// P_e(t) in the double-excitation sector with the single-sector companion.
Written run_double(const Context& ctx);

/// Stretched-exponential fit of a trajectory CSV.
Written run_fit(const Context& ctx);

/// Build (or load) the contour rules of the config; optionally export the
/// nodes and weights as CSV.
Written run_cache_build(const Context& ctx, const std::optional<std::filesystem::path>& export_csv);

/// File-name tag for a parameter point, e.g. "s0.2_eta0.1_N2000_conjugated".
std::string point_tag(double s, double eta, std::optional<int> nodes = std::nullopt,
                      std::optional<std::string> variant = std::nullopt);

}  // namespace cda::commands
