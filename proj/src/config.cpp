#include "cda/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace cda::config {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string where(const Entry& e) { return e.origin.empty() ? "" : e.origin + ": "; }

double to_double(const std::string& key, const Entry& e) {
  try {
    std::size_t used = 0;
    const double v = std::stod(e.value, &used);
    if (trim(e.value.substr(used)).empty() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(where(e) + key + ": expected a number, got '" + e.value + "'");
}

int to_int(const std::string& key, const Entry& e) {
  const double v = to_double(key, e);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw ConfigError(where(e) + key + ": expected an integer, got '" + e.value + "'");
  }
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const Entry& e) {
  std::string v = e.value;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(where(e) + key + ": expected true/false, got '" + e.value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<double> to_doubles(const std::string& key, const Entry& e) {
  std::vector<double> out;
  for (const auto& item : split_list(e.value)) out.push_back(to_double(key, {item, e.origin}));
  if (out.empty()) throw ConfigError(where(e) + key + ": empty list");
  return out;
}

std::vector<int> to_ints(const std::string& key, const Entry& e) {
  std::vector<int> out;
  for (const auto& item : split_list(e.value)) out.push_back(to_int(key, {item, e.origin}));
  if (out.empty()) throw ConfigError(where(e) + key + ": empty list");
  return out;
}

Propagator to_propagator(const std::string& key, const Entry& e) {
  if (e.value == "dis") return Propagator::Dis;
  if (e.value == "tilde") return Propagator::Tilde;
  if (e.value == "blend") return Propagator::Blend;
  if (e.value == "auto") return Propagator::Auto;
  throw ConfigError(where(e) + key + ": expected dis|tilde|blend|auto, got '" + e.value + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const Entry&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model.delta", [](RunConfig& c, const auto& k, const auto& e) { c.model.delta = to_double(k, e); }},
      {"model.s", [](RunConfig& c, const auto& k, const auto& e) { c.s_values = to_doubles(k, e); }},
      {"model.eta", [](RunConfig& c, const auto& k, const auto& e) { c.eta_values = to_doubles(k, e); }},
      {"model.points",
       [](RunConfig& c, const auto& k, const auto& e) {
         c.pairs.clear();
         for (const auto& item : split_list(e.value)) {
           const auto colon = item.find(':');
           if (colon == std::string::npos) {
             throw ConfigError(where(e) + k + ": expected s:eta pairs, got '" + item + "'");
           }
           c.pairs.emplace_back(to_double(k, {trim(item.substr(0, colon)), e.origin}),
                                to_double(k, {trim(item.substr(colon + 1)), e.origin}));
         }
       }},
      {"model.omega_c", [](RunConfig& c, const auto& k, const auto& e) { c.model.omega_c = to_double(k, e); }},
      {"contour.rule",
       [](RunConfig& c, const auto& k, const auto& e) {
         if (e.value == "complex") c.rule = RuleSource::Complex;
         else if (e.value == "real") c.rule = RuleSource::Real;
         else throw ConfigError(where(e) + k + ": expected complex|real, got '" + e.value + "'");
       }},
      {"contour.radius", [](RunConfig& c, const auto& k, const auto& e) { c.contour.radius = to_double(k, e); }},
      {"contour.nodes", [](RunConfig& c, const auto& k, const auto& e) { c.node_values = to_ints(k, e); }},
      {"contour.theta_points", [](RunConfig& c, const auto& k, const auto& e) { c.contour.theta_points = to_int(k, e); }},
      {"hamiltonian.coupling",
       [](RunConfig& c, const auto& k, const auto& e) {
         if (e.value == "both") {
           c.couplings = {hamiltonian::Coupling::Conjugated, hamiltonian::Coupling::Symmetric};
           return;
         }
         try {
           c.couplings = {hamiltonian::parse_coupling(e.value)};
         } catch (const ConfigError& err) {
           throw ConfigError(where(e) + k + ": " + err.what());
         }
       }},
      {"hamiltonian.max_dim",
       [](RunConfig& c, const auto& k, const auto& e) {
         const int v = to_int(k, e);
         if (v < 1) throw ConfigError(where(e) + k + ": must be >= 1");
         c.max_dim = static_cast<std::size_t>(v);
       }},
      {"hamiltonian.dump_matrix", [](RunConfig& c, const auto& k, const auto& e) { c.dump_matrix = to_bool(k, e); }},
      {"times.t_max", [](RunConfig& c, const auto& k, const auto& e) { c.times.t_max = to_double(k, e); }},
      {"times.dt", [](RunConfig& c, const auto& k, const auto& e) { c.times.dt = to_double(k, e); }},
      {"exact.t_max", [](RunConfig& c, const auto& k, const auto& e) { c.exact_times.t_max = to_double(k, e); }},
      {"exact.dt", [](RunConfig& c, const auto& k, const auto& e) { c.exact_times.dt = to_double(k, e); }},
      {"cda.propagator", [](RunConfig& c, const auto& k, const auto& e) { c.propagator = to_propagator(k, e); }},
      {"cda.t_switch", [](RunConfig& c, const auto& k, const auto& e) { c.t_switch = to_double(k, e); }},
      {"cda.compare_exact", [](RunConfig& c, const auto& k, const auto& e) { c.compare_exact = to_bool(k, e); }},
      {"cda.compute_exact", [](RunConfig& c, const auto& k, const auto& e) { c.compute_exact = to_bool(k, e); }},
      {"phase.eta_start", [](RunConfig& c, const auto& k, const auto& e) { c.eta_start = to_double(k, e); }},
      {"phase.eta_stop", [](RunConfig& c, const auto& k, const auto& e) { c.eta_stop = to_double(k, e); }},
      {"phase.eta_step", [](RunConfig& c, const auto& k, const auto& e) { c.eta_step = to_double(k, e); }},
      {"phase.gap_tol", [](RunConfig& c, const auto& k, const auto& e) { c.gap_tol = to_double(k, e); }},
      {"phase.refine_steps", [](RunConfig& c, const auto& k, const auto& e) { c.refine_steps = to_int(k, e); }},
      {"phase.sensitivity", [](RunConfig& c, const auto& k, const auto& e) { c.sensitivity = to_bool(k, e); }},
      {"phase.radii", [](RunConfig& c, const auto& k, const auto& e) { c.radii = to_doubles(k, e); }},
      {"double.companion", [](RunConfig& c, const auto& k, const auto& e) { c.double_companion = to_propagator(k, e); }},
      {"double.t_max", [](RunConfig& c, const auto& k, const auto& e) { c.double_t_max = to_double(k, e); }},
      {"fit.input", [](RunConfig& c, const auto&, const auto& e) { c.fit_input = e.value; }},
      {"fit.t_lo", [](RunConfig& c, const auto& k, const auto& e) { c.fit_t_lo = to_double(k, e); }},
      {"fit.t_hi", [](RunConfig& c, const auto& k, const auto& e) { c.fit_t_hi = to_double(k, e); }},
      {"fit.seam", [](RunConfig& c, const auto& k, const auto& e) { c.fit_seam = to_double(k, e); }},
      {"output.dir", [](RunConfig& c, const auto&, const auto& e) { c.output_dir = e.value; }},
      {"output.cache", [](RunConfig& c, const auto& k, const auto& e) { c.cache = to_bool(k, e); }},
      {"run.jobs", [](RunConfig& c, const auto& k, const auto& e) { c.jobs = to_int(k, e); }},
  };
  return table;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

KeyValues KeyValues::parse(const std::string& text, const std::string& source) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line, section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string origin = source + ":" + std::to_string(number);
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(origin + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ": expected 'key = value'");
    if (section.empty()) throw ConfigError(origin + ": key outside of any [section]");
    kv.set(section + "." + trim(line.substr(0, eq)), trim(line.substr(eq + 1)), origin);
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

void KeyValues::set(const std::string& key, const std::string& value, const std::string& origin) {
  if (!setters().contains(key)) {
    const auto dot = key.find('.');
    throw ConfigError(origin + ": unknown key '" + key.substr(dot + 1) + "' in section [" +
                      key.substr(0, dot) + "]");
  }
  entries_[key] = {value, origin};
}

void KeyValues::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || assignment.find('.') > eq) {
    throw ConfigError("--set " + assignment + ": expected section.key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "--set");
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

std::vector<std::pair<double, double>> RunConfig::parameter_points() const {
  if (!pairs.empty()) return pairs;
  std::vector<std::pair<double, double>> out;
  for (const double s : s_values) {
    for (const double eta : eta_values) out.emplace_back(s, eta);
  }
  return out;
}

std::vector<double> RunConfig::phase_eta_grid() const {
  if (eta_step <= 0.0) return eta_values;
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((eta_stop - eta_start) / eta_step + 1e-9));
  for (long i = 0; i <= count; ++i) grid.push_back(eta_start + static_cast<double>(i) * eta_step);
  return grid;
}

RunConfig build(const KeyValues& kv) {
  RunConfig c;
  for (const auto& [key, entry] : kv.entries()) setters().at(key)(c, key, entry);

  c.model.s = c.s_values.front();
  c.model.eta = c.eta_values.front();
  c.model.validate();
  for (const double s : c.s_values) require(s >= 0.0, "model.s values must be >= 0");
  for (const double eta : c.eta_values) require(eta >= 0.0, "model.eta values must be >= 0");
  for (const auto& [s, eta] : c.pairs) require(s >= 0.0 && eta >= 0.0, "model.points need s, eta >= 0");
  for (const int n : c.node_values) require(n >= 1, "contour.nodes values must be >= 1");
  c.contour.nodes = c.node_values.front();
  if (c.rule == RuleSource::Complex) c.contour.validate();
  for (const double r : c.radii) require(r > 0.0, "phase.radii values must be > 0");
  require(c.times.dt > 0.0 && c.times.t_max >= 0.0, "times: need dt > 0 and t_max >= 0");
  require(c.exact_times.dt > 0.0 && c.exact_times.t_max >= 0.0,
          "exact: need dt > 0 and t_max >= 0");
  require(c.t_switch >= 0.0, "cda.t_switch must be >= 0");
  require(c.gap_tol >= 0.0, "phase.gap_tol must be >= 0");
  require(c.refine_steps >= 0, "phase.refine_steps must be >= 0");
  require(c.double_t_max >= 0.0, "double.t_max must be >= 0");
  require(c.jobs >= 1, "run.jobs must be >= 1");
  if (c.eta_step > 0.0) {
    require(c.eta_stop >= c.eta_start && c.eta_start >= 0.0,
            "phase: need 0 <= eta_start <= eta_stop");
  }
  return c;
}

RunConfig load(const std::optional<std::filesystem::path>& path,
               const std::vector<std::string>& overrides) {
  KeyValues kv = path ? KeyValues::load(*path) : KeyValues{};
  for (const auto& o : overrides) kv.apply_override(o);
  return build(kv);
}

std::string to_string(Propagator p) {
  switch (p) {
    case Propagator::Dis: return "dis";
    case Propagator::Tilde: return "tilde";
    case Propagator::Blend: return "blend";
    case Propagator::Auto: return "auto";
  }
  return "auto";
}

}  // namespace cda::config
