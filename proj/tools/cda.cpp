#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cda/cache.hpp"
#include "cda/commands.hpp"
#include "cda/config.hpp"
#include "cda/types.hpp"

namespace fs = std::filesystem;
using namespace cda;

namespace {

struct Options {
  std::optional<fs::path> config;
  std::vector<std::string> overrides;
  std::optional<fs::path> out;
  std::optional<int> jobs;
  std::optional<fs::path> cache_dir;
  bool no_cache = false;
  bool quiet = false;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("-c,--config", o.config, "INI config file")->check(CLI::ExistingFile);
  app->add_option("--set", o.overrides, "override a key, section.key=value (repeatable)");
  app->add_option("-o,--out", o.out, "output directory");
  app->add_option("--jobs", o.jobs, "worker threads for eta scans")->check(CLI::PositiveNumber);
  app->add_option("--cache-dir", o.cache_dir, "rule/reference cache directory");
  app->add_flag("--no-cache", o.no_cache, "neither read nor write the cache");
  app->add_flag("-q,--quiet", o.quiet, "no progress log");
}

config::RunConfig make_config(const Options& o, std::vector<std::string> extra) {
  std::vector<std::string> overrides = o.overrides;
  for (auto& e : extra) overrides.push_back(std::move(e));
  if (o.out) overrides.push_back("output.dir=" + o.out->string());
  if (o.jobs) overrides.push_back("run.jobs=" + std::to_string(*o.jobs));
  if (o.no_cache) overrides.push_back("output.cache=false");
  return config::load(o.config, overrides);
}

cache::Store make_store(const Options& o, bool enabled) {
  return cache::Store(o.cache_dir ? *o.cache_dir : cache::default_directory(), enabled);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complex discretization approximation of the spin-boson model"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "cda 1.0");

  Options o;
  std::optional<fs::path> fit_file;
  std::optional<double> fit_lo, fit_hi;
  std::optional<fs::path> export_csv;

  const std::vector<std::pair<std::string, std::string>> runs = {
      {"exact", "numerically exact survival from the memory-kernel equation"},
      {"cda", "survival probability from the discretized bath"},
      {"spectrum", "eigenvalues and ground state of the effective Hamiltonian"},
      {"phase", "eta scans: phase boundaries, PMP and sigma_z"},
      {"double", "double-excitation sector P_e(t)"},
  };
  std::vector<CLI::App*> run_apps;
  for (const auto& [name, help] : runs) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, o);
    run_apps.push_back(sub);
  }

  auto* fit = app.add_subcommand("fit", "stretched-exponential fit of a survival CSV");
  add_common(fit, o);
  fit->add_option("input", fit_file, "trajectory CSV (t,value)")->check(CLI::ExistingFile);
  fit->add_option("--t-lo", fit_lo, "window start");
  fit->add_option("--t-hi", fit_hi, "window end");

  auto* cache_app = app.add_subcommand("cache", "inspect or populate the rule cache");
  cache_app->require_subcommand(1);
  auto* cache_path = cache_app->add_subcommand("path", "print the cache directory");
  auto* cache_list = cache_app->add_subcommand("list", "list cache entries");
  auto* cache_clear = cache_app->add_subcommand("clear", "delete cache entries");
  auto* cache_build = cache_app->add_subcommand("build", "compute the contour rules of a config");
  for (auto* sub : {cache_path, cache_list, cache_clear}) {
    sub->add_option("--cache-dir", o.cache_dir, "cache directory");
  }
  add_common(cache_build, o);
  cache_build->add_option("--export", export_csv, "also write nodes and weights as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (o.quiet) std::clog.setstate(std::ios::failbit);
    if (cache_app->parsed()) {
      const auto store = make_store(o, true);
      if (cache_path->parsed()) {
        std::cout << store.directory().string() << '\n';
      } else if (cache_list->parsed()) {
        for (const auto& e : store.entries()) std::cout << e.string() << '\n';
      } else if (cache_clear->parsed()) {
        std::cout << "removed " << store.clear() << " entries\n";
      } else {
        const auto cfg = make_config(o, {});
        commands::Context ctx{cfg, make_store(o, cfg.cache), std::clog};
        for (const auto& p : commands::run_cache_build(ctx, export_csv)) {
          std::cout << p.string() << '\n';
        }
      }
      return 0;
    }

    std::vector<std::string> extra;
    if (fit->parsed()) {
      if (fit_file) extra.push_back("fit.input=" + fit_file->string());
      if (fit_lo) extra.push_back("fit.t_lo=" + std::to_string(*fit_lo));
      if (fit_hi) extra.push_back("fit.t_hi=" + std::to_string(*fit_hi));
    }
    const auto cfg = make_config(o, extra);
    commands::Context ctx{cfg, make_store(o, cfg.cache), std::clog};

    commands::Written written;
    if (fit->parsed()) {
      written = commands::run_fit(ctx);
    } else if (run_apps[0]->parsed()) {
      written = commands::run_exact(ctx);
    } else if (run_apps[1]->parsed()) {
      written = commands::run_cda(ctx);
    } else if (run_apps[2]->parsed()) {
      written = commands::run_spectrum(ctx);
    } else if (run_apps[3]->parsed()) {
      written = commands::run_phase(ctx);
    } else {
      written = commands::run_double(ctx);
    }
    for (const auto& p : written) std::cout << p.string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "cda: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "cda: numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "cda: error: " << e.what() << '\n';
    return 3;
  }
}
