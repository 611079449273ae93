#include "cda/cache.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cda::cache {
namespace {

std::string num(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

nlohmann::json pack(const std::vector<cplx>& values) {
  auto arr = nlohmann::json::array();
  for (const cplx v : values) arr.push_back({v.real(), v.imag()});
  return arr;
}

std::vector<cplx> unpack(const nlohmann::json& arr) {
  std::vector<cplx> out;
  out.reserve(arr.size());
  for (const auto& v : arr) out.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
  return out;
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write cache entry " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::filesystem::path default_directory() {
  if (const char* env = std::getenv(kDirectoryEnv); env != nullptr && *env != '\0') return env;
  return ".cda-cache";
}

Store::Store(std::filesystem::path directory, bool enabled)
    : dir_(std::move(directory)), enabled_(enabled) {}

std::filesystem::path Store::rule_path(const quadrature::ContourSpec& spec,
                                       const std::string& weight_id) const {
  return dir_ / ("rule_" + weight_id + "_R" + num(spec.radius) + "_N" +
                 std::to_string(spec.nodes) + "_M" +
                 std::to_string(spec.resolved_theta_points()) + ".json");
}

std::optional<quadrature::QuadratureRule> Store::load_rule(const quadrature::ContourSpec& spec,
                                                           const std::string& weight_id) const {
  if (!enabled_) return std::nullopt;
  const auto path = rule_path(spec, weight_id);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (doc.value("format", "") != "cda-rule" || doc.value("version", 0) != kFormatVersion ||
      doc.value("weight", "") != weight_id || doc.value("radius", -1.0) != spec.radius ||
      doc.value("nodes", -1) != spec.nodes ||
      doc.value("theta_points", -1) != spec.resolved_theta_points()) {
    return std::nullopt;
  }
  quadrature::QuadratureRule rule;
  rule.kind = quadrature::RuleKind::ComplexContour;
  rule.scale = 1.0;
  rule.mu0 = {doc.at("mu0").at(0).get<double>(), doc.at("mu0").at(1).get<double>()};
  rule.nodes = unpack(doc.at("rule_nodes"));
  rule.weights = unpack(doc.at("rule_weights"));
  if (rule.nodes.size() != static_cast<std::size_t>(spec.nodes) ||
      rule.weights.size() != rule.nodes.size()) {
    return std::nullopt;
  }
  return rule;
}

void Store::store_rule(const quadrature::ContourSpec& spec, const quadrature::QuadratureRule& rule,
                       const std::string& weight_id) const {
  if (!enabled_) return;
  const auto unit = rule.rescaled(1.0);
  nlohmann::json doc = {
      {"format", "cda-rule"},
      {"version", kFormatVersion},
      {"weight", weight_id},
      {"radius", spec.radius},
      {"nodes", spec.nodes},
      {"theta_points", spec.resolved_theta_points()},
      {"mu0", {unit.mu0.real(), unit.mu0.imag()}},
      {"rule_nodes", pack(unit.nodes)},
      {"rule_weights", pack(unit.weights)},
  };
  write_atomically(rule_path(spec, weight_id), doc.dump());
}

quadrature::QuadratureRule Store::contour_rule(const quadrature::ContourSpec& spec, double omega_c,
                                               bool* hit) const {
  if (auto cached = load_rule(spec)) {
    if (hit) *hit = true;
    return cached->rescaled(omega_c);
  }
  if (hit) *hit = false;
  const auto unit = quadrature::contour_rule(spec, 1.0);
  store_rule(spec, unit);
  // round-trip through the stored form so cold and warm runs agree bit for bit
  if (auto cached = load_rule(spec)) return cached->rescaled(omega_c);
  return unit.rescaled(omega_c);
}

std::filesystem::path Store::exact_path(const spectral::ModelParams& p, double t_max, double dt,
                                        double dt_out) const {
  return dir_ / ("exact_s" + num(p.s) + "_eta" + num(p.eta) + "_delta" + num(p.delta) + "_wc" +
                 num(p.omega_c) + "_T" + num(t_max) + "_dt" + num(dt) + "_out" + num(dt_out) +
                 ".csv");
}

std::optional<dynamics::Trajectory> Store::load_exact(const spectral::ModelParams& p, double t_max,
                                                      double dt, double dt_out) const {
  if (!enabled_) return std::nullopt;
  const auto path = exact_path(p, t_max, dt, dt_out);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return dynamics::read_csv(path);
}

void Store::store_exact(const spectral::ModelParams& p, double t_max, double dt, double dt_out,
                        const dynamics::Trajectory& survival) const {
  if (!enabled_) return;
  const auto path = exact_path(p, t_max, dt, dt_out);
  auto tmp = path;
  tmp += ".tmp";
  dynamics::write_csv(tmp, survival);
  std::filesystem::rename(tmp, path);
}

std::vector<std::filesystem::path> Store::entries() const {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir_)) return out;
  for (const auto& e : std::filesystem::directory_iterator(dir_)) {
    if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t Store::clear() const {
  std::size_t removed = 0;
  for (const auto& path : entries()) {
    const auto name = path.filename().string();
    if (name.starts_with("rule_") || name.starts_with("exact_")) {
      std::filesystem::remove(path);
      ++removed;
    }
  }
  return removed;
}

}  // namespace cda::cache
