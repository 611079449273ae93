#include "cda/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cda/analysis.hpp"
#include "cda/exact.hpp"

namespace cda::commands {
namespace {

using nlohmann::json;
using config::Propagator;

std::string fmt(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

std::filesystem::path out_path(const Context& ctx, const std::string& name) {
  std::filesystem::create_directories(ctx.config.output_dir);
  return ctx.config.output_dir / name;
}

void write_json(const std::filesystem::path& path, const json& doc, Written& written) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  written.push_back(path);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

spectral::ModelParams params_at(const Context& ctx, double s, double eta) {
  spectral::ModelParams p = ctx.config.model;
  p.s = s;
  p.eta = eta;
  p.validate();
  return p;
}

quadrature::ContourSpec contour_with(const Context& ctx, int nodes) {
  quadrature::ContourSpec spec = ctx.config.contour;
  spec.nodes = nodes;
  spec.validate();
  return spec;
}

quadrature::QuadratureRule rule_for(const Context& ctx, int nodes, const spectral::ModelParams& p) {
  if (ctx.config.rule == config::RuleSource::Real) return quadrature::real_space_rule(p, nodes);
  bool hit = false;
  auto rule = ctx.store.contour_rule(contour_with(ctx, nodes), p.omega_c, &hit);
  ctx.log << "[cda] contour rule R=" << ctx.config.contour.radius << " N=" << nodes
          << (hit ? " (cached)" : " (computed)") << '\n';
  return rule;
}

bool real_rule(const Context& ctx) { return ctx.config.rule == config::RuleSource::Real; }

/// auto: H_dis below s = 1; for s = 1, the blend when a bound state exists
/// and sqrt(H^dag H) otherwise.
Propagator resolve_cda(const Context& ctx, const spectral::ModelParams& p) {
  if (real_rule(ctx)) return Propagator::Dis;
  if (ctx.config.propagator != Propagator::Auto) return ctx.config.propagator;
  if (p.s != 1.0) return Propagator::Dis;
  return exact::bound_state_energy(p) ? Propagator::Blend : Propagator::Tilde;
}

/// auto: H_dis below s = 1, sqrt(H^dag H) at s = 1.
Propagator resolve_companion(const Context& ctx, const spectral::ModelParams& p) {
  if (real_rule(ctx)) return Propagator::Dis;
  if (ctx.config.double_companion != Propagator::Auto) return ctx.config.double_companion;
  return p.s == 1.0 ? Propagator::Tilde : Propagator::Dis;
}

struct SingleResult {
  dynamics::Trajectory survival;
  json meta;
};

SingleResult single_survival(const hamiltonian::EffectiveHamiltonian& h, Propagator prop,
                             double t_switch, const std::vector<double>& times) {
  const auto psi0 = dynamics::spin_excited_state(h.dim());
  SingleResult out;
  out.meta["propagator"] = config::to_string(prop);
  const auto describe = [&](const dynamics::Spectrum& spec) {
    out.meta["max_imag_eigenvalue"] = spec.hermitian ? 0.0 : spec.max_imag();
    out.meta["eigenvector_condition"] = spec.condition;
    if (spec.warning) out.meta["warning"] = *spec.warning;
  };
  if (prop == Propagator::Tilde) {
    const auto spec = dynamics::hermitianized_spectrum(h);
    out.survival = dynamics::survival_probability(spec, psi0, times);
  } else if (prop == Propagator::Blend) {
    const auto spec = dynamics::diagonalize(h);
    describe(spec);
    const auto tilde = dynamics::hermitianized_spectrum(h);
    auto blended = dynamics::blended_survival(spec, tilde, psi0, times, t_switch);
    out.survival = std::move(blended.trajectory);
    out.meta["t_switch"] = t_switch;
    out.meta["seam_jump"] = blended.seam_jump;
  } else {
    const auto spec = dynamics::diagonalize(h);
    describe(spec);
    out.survival = dynamics::survival_probability(spec, psi0, times);
  }
  out.survival.label = "survival";
  return out;
}

dynamics::Trajectory truncate(const dynamics::Trajectory& traj, double t_max) {
  dynamics::Trajectory out;
  out.label = traj.label;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.times[i] > t_max + 1e-9) break;
    out.times.push_back(traj.times[i]);
    out.values.push_back(traj.values[i]);
  }
  return out;
}

std::size_t output_stride(const Context& ctx) {
  const double ratio = ctx.config.times.dt / ctx.config.exact_times.dt;
  const auto stride = static_cast<std::size_t>(std::llround(ratio));
  if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-6 * ratio) {
    throw ConfigError("times.dt must be an integer multiple of exact.dt");
  }
  return stride;
}

dynamics::Trajectory exact_survival(const Context& ctx, const spectral::ModelParams& p,
                                    bool compute, dynamics::ComplexTrajectory* alpha_out) {
  const auto& et = ctx.config.exact_times;
  const double dt_out = ctx.config.times.dt;
  if (!alpha_out) {
    if (auto cached = ctx.store.load_exact(p, et.t_max, et.dt, dt_out)) return *cached;
    if (!compute) return {};
  }
  const auto alpha = exact::volterra_alpha(p, et.t_max, et.dt);
  auto survival = exact::survival_from_alpha(alpha, output_stride(ctx));
  ctx.store.store_exact(p, et.t_max, et.dt, dt_out, survival);
  if (alpha_out) *alpha_out = alpha;
  return survival;
}

}  // namespace

std::string point_tag(double s, double eta, std::optional<int> nodes,
                      std::optional<std::string> variant) {
  std::string tag = "s" + fmt(s) + "_eta" + fmt(eta);
  if (nodes) tag += "_N" + std::to_string(*nodes);
  if (variant) tag += "_" + *variant;
  return tag;
}

Written run_exact(const Context& ctx) {
  Written written;
  const std::size_t stride = output_stride(ctx);
  for (const auto& [s, eta] : ctx.config.parameter_points()) {
    const auto p = params_at(ctx, s, eta);
    const std::string tag = point_tag(s, eta);
    ctx.log << "[cda] exact " << tag << " t_max=" << ctx.config.exact_times.t_max
            << " dt=" << ctx.config.exact_times.dt << '\n';
    dynamics::ComplexTrajectory alpha;
    const auto survival = exact_survival(ctx, p, true, &alpha);

    dynamics::ComplexTrajectory coarse;
    coarse.label = "alpha";
    for (std::size_t j = 0; j < alpha.times.size(); j += stride) {
      coarse.times.push_back(alpha.times[j]);
      coarse.values.push_back(alpha.values[j]);
    }
    const auto alpha_path = out_path(ctx, "exact_alpha_" + tag + ".csv");
    dynamics::write_csv(alpha_path, coarse);
    written.push_back(alpha_path);
    const auto surv_path = out_path(ctx, "exact_survival_" + tag + ".csv");
    dynamics::write_csv(surv_path, survival);
    written.push_back(surv_path);

    json doc = {{"s", s}, {"eta", eta}, {"delta", p.delta}, {"omega_c", p.omega_c}};
    const auto threshold = spectral::coupling_threshold(p);
    doc["eta_c"] = threshold.bound_for_any_eta ? json(nullptr) : json(threshold.eta_c);
    if (const auto eb = exact::bound_state_energy(p)) {
      const auto bs = exact::bound_state_residue(p, *eb);
      doc["bound_state"] = {{"energy", bs.energy}, {"residue", bs.residue}, {"plateau", bs.plateau}};
    } else {
      doc["bound_state"] = nullptr;
    }
    write_json(out_path(ctx, "bound_state_" + tag + ".json"), doc, written);
  }
  return written;
}

Written run_cda(const Context& ctx) {
  Written written;
  const auto times = dynamics::uniform_grid(ctx.config.times.t_max, ctx.config.times.dt);
  for (const int nodes : ctx.config.node_values) {
    std::optional<quadrature::QuadratureRule> shared;
    for (const auto& [s, eta] : ctx.config.parameter_points()) {
      const auto p = params_at(ctx, s, eta);
      if (!shared || real_rule(ctx)) shared = rule_for(ctx, nodes, p);
      const auto rule = shared->rescaled(p.omega_c);
      const auto bath = hamiltonian::bath_modes(rule, p);
      const Propagator prop = resolve_cda(ctx, p);

      for (const auto coupling : ctx.config.couplings) {
        const auto h = hamiltonian::build_single(bath, p, coupling);
        const std::string tag =
            point_tag(s, eta, nodes, real_rule(ctx) ? "real" : hamiltonian::to_string(coupling));
        ctx.log << "[cda] survival " << tag << " propagator=" << config::to_string(prop) << '\n';
        if (ctx.config.dump_matrix) {
          const auto dump = out_path(ctx, "matrix_" + tag + ".bin");
          hamiltonian::write_matrix_dump(dump, h);
          written.push_back(dump);
        }
        auto result = single_survival(h, prop, ctx.config.t_switch, times);
        const auto path = out_path(ctx, "survival_" + tag + ".csv");
        dynamics::write_csv(path, result.survival);
        written.push_back(path);

        json meta = result.meta;
        meta.update({{"s", s}, {"eta", eta}, {"nodes", nodes},
                     {"radius", ctx.config.contour.radius},
                     {"variant", hamiltonian::to_string(h.variant)}});
        if (ctx.config.compare_exact) {
          const auto reference = exact_survival(ctx, p, ctx.config.compute_exact, nullptr);
          if (!reference.times.empty()) {
            const auto clipped = truncate(result.survival, reference.times.back());
            const auto err = exact::error_metric(clipped, reference);
            const auto epath = out_path(ctx, "error_" + tag + ".csv");
            dynamics::write_csv(epath, err.error);
            written.push_back(epath);
            meta["sup_abs_error"] = err.sup_abs(0.0, reference.times.back());
            meta["flagged_points"] = err.flagged_count;
            ctx.log << "[cda]   sup|error| = " << meta["sup_abs_error"].get<double>() << '\n';
          } else {
            ctx.log << "[cda]   no cached reference series; run `cda exact` first or set "
                       "cda.compute_exact = true\n";
          }
        }
        write_json(out_path(ctx, "survival_" + tag + ".json"), meta, written);
      }
    }
  }
  return written;
}

Written run_spectrum(const Context& ctx) {
  Written written;
  for (const int nodes : ctx.config.node_values) {
    std::optional<quadrature::QuadratureRule> shared;
    for (const auto& [s, eta] : ctx.config.parameter_points()) {
      const auto p = params_at(ctx, s, eta);
      if (!shared || real_rule(ctx)) shared = rule_for(ctx, nodes, p);
      const auto bath = hamiltonian::bath_modes(shared->rescaled(p.omega_c), p);
      for (const auto coupling : ctx.config.couplings) {
        const auto h = hamiltonian::build_single(bath, p, coupling);
        const std::string tag =
            point_tag(s, eta, nodes, real_rule(ctx) ? "real" : hamiltonian::to_string(coupling));
        ctx.log << "[cda] spectrum " << tag << '\n';
        CVector values;
        const auto g = analysis::ground_state(h, &values);
        std::vector<cplx> sorted(values.begin(), values.end());
        std::sort(sorted.begin(), sorted.end(), [](cplx a, cplx b) {
          return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        });
        const auto path = out_path(ctx, "spectrum_" + tag + ".csv");
        {
          std::ofstream out(path);
          out.precision(17);
          out << "re,im\n";
          for (const cplx e : sorted) out << e.real() << ',' << e.imag() << '\n';
        }
        written.push_back(path);

        double max_imag = -std::numeric_limits<double>::infinity();
        std::size_t negative = 0;
        for (const cplx e : sorted) {
          max_imag = std::max(max_imag, e.imag());
          if (e.real() < 0.0) ++negative;
        }
        json doc = {{"s", s}, {"eta", eta}, {"nodes", nodes},
                    {"variant", hamiltonian::to_string(h.variant)},
                    {"count", sorted.size()}, {"max_imag", max_imag},
                    {"negative_real_count", negative},
                    {"min_real", sorted.front().real()}, {"max_real", sorted.back().real()},
                    {"ground", {{"eigen_index", g.eigen_index},
                                {"eigenvalue", {g.eigenvalue.real(), g.eigenvalue.imag()}},
                                {"gap", g.gap},
                                {"pmp_index", g.pmp_index},
                                {"sigma_z", g.sigma_z},
                                {"sigma_z_biorthogonal", g.sigma_z_biorthogonal}}}};
        write_json(out_path(ctx, "ground_" + tag + ".json"), doc, written);
      }
    }
  }
  return written;
}

Written run_phase(const Context& ctx) {
  if (real_rule(ctx)) throw ConfigError("phase scans need contour.rule = complex");
  const auto grid = ctx.config.phase_eta_grid();
  if (grid.empty()) throw ConfigError("phase: empty eta grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ConfigError("phase: eta grid must be strictly ascending");
  }
  analysis::ScanConfig scan;
  scan.base = ctx.config.model;
  scan.coupling = ctx.config.couplings.front();
  scan.gap_tol = ctx.config.gap_tol;
  scan.refine_steps = ctx.config.refine_steps;
  scan.jobs = ctx.config.jobs;

  Written written;
  const int nodes = ctx.config.node_values.front();
  const auto rule = rule_for(ctx, nodes, ctx.config.model).rescaled(1.0);

  const auto csv_path = out_path(ctx, "phase.csv");
  std::ofstream csv(csv_path);
  csv.precision(17);
  csv << "s,eta,region,gap,pmp_index,sigma_z,sigma_z_biorthogonal\n";
  json summary = json::array();
  for (const double s : ctx.config.s_values) {
    ctx.log << "[cda] phase scan s=" << s << " over " << grid.size() << " eta values\n";
    const auto result = analysis::scan_eta(s, grid, rule, scan);
    for (const auto& pt : result.points) {
      csv << pt.s << ',' << pt.eta << ',' << analysis::to_string(pt.region) << ',' << pt.gap << ','
          << pt.pmp_index << ',' << pt.sigma_z << ',' << pt.sigma_z_biorthogonal << '\n';
    }
    for (const auto& w : result.warnings) ctx.log << "[cda] warning: " << w << '\n';
    summary.push_back({{"s", s}, {"eta_I", optional_json(result.eta_I)},
                       {"eta_II", optional_json(result.eta_II)}, {"warnings", result.warnings},
                       {"nodes", nodes}, {"radius", ctx.config.contour.radius},
                       {"grid_step", grid.size() > 1 ? grid[1] - grid[0] : 0.0},
                       {"refine_steps", ctx.config.refine_steps}});
  }
  csv.close();
  written.push_back(csv_path);
  write_json(out_path(ctx, "phase_summary.json"), summary, written);

  if (ctx.config.sensitivity) {
    const auto provider = [&](const quadrature::ContourSpec& spec) {
      quadrature::ContourSpec full = spec;
      full.theta_points = ctx.config.contour.theta_points;
      return ctx.store.contour_rule(full, 1.0);
    };
    const auto sens_path = out_path(ctx, "sensitivity.csv");
    std::ofstream sens(sens_path);
    sens.precision(17);
    sens << "s,radius,nodes,eta_I,eta_II\n";
    const auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string("nan"); };
    for (const double s : ctx.config.s_values) {
      ctx.log << "[cda] (R, N) sensitivity s=" << s << '\n';
      const auto rows = analysis::rn_sensitivity(s, grid, ctx.config.radii, ctx.config.node_values,
                                                 scan, provider);
      for (const auto& row : rows) {
        sens << s << ',' << row.radius << ',' << row.nodes << ',' << opt(row.eta_I) << ','
             << opt(row.eta_II) << '\n';
      }
    }
    written.push_back(sens_path);
  }
  return written;
}

Written run_double(const Context& ctx) {
  Written written;
  const int nodes = ctx.config.node_values.front();
  const auto times = dynamics::uniform_grid(ctx.config.double_t_max, ctx.config.times.dt);
  std::optional<quadrature::QuadratureRule> shared;
  for (const auto& [s, eta] : ctx.config.parameter_points()) {
    const auto p = params_at(ctx, s, eta);
    if (!shared || real_rule(ctx)) shared = rule_for(ctx, nodes, p);
    const auto bath = hamiltonian::bath_modes(shared->rescaled(p.omega_c), p);
    const auto coupling = ctx.config.couplings.front();
    const auto hd = hamiltonian::build_double(bath, p, coupling, ctx.config.max_dim);
    const std::string tag =
        point_tag(s, eta, nodes, real_rule(ctx) ? "real" : hamiltonian::to_string(coupling));
    ctx.log << "[cda] double sector " << tag << " dim=" << hd.dim() << '\n';
    if (ctx.config.dump_matrix) {
      const auto dump = out_path(ctx, "matrix_double_" + tag + ".bin");
      hamiltonian::write_matrix_dump(dump, hd);
      written.push_back(dump);
    }
    const auto spec = hd.is_hermitian_variant() ? dynamics::diagonalize(hd)
                                                : dynamics::hermitianized_spectrum(hd);
    const auto obs = dynamics::pe_double(spec, dynamics::uniform_double_state(bath.size()),
                                         bath.size(), times);
    const auto pe_path = out_path(ctx, "pe_" + tag + ".csv");
    dynamics::write_csv(pe_path, obs.pe);
    written.push_back(pe_path);
    const auto norm_path = out_path(ctx, "norm_" + tag + ".csv");
    dynamics::write_csv(norm_path, obs.norm);
    written.push_back(norm_path);

    const auto h1 = hamiltonian::build_single(bath, p, coupling);
    const Propagator prop = resolve_companion(ctx, p);
    const auto single = single_survival(h1, prop, ctx.config.t_switch, times);
    const auto single_path = out_path(ctx, "survival_single_" + tag + ".csv");
    dynamics::write_csv(single_path, single.survival);
    written.push_back(single_path);

    double sup_diff = 0.0, norm_dev = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      sup_diff = std::max(sup_diff, std::abs(obs.pe.values[i] - single.survival.values[i]));
    }
    for (const double v : obs.norm.values) norm_dev = std::max(norm_dev, std::abs(v - 1.0));
    json doc = {{"s", s}, {"eta", eta}, {"nodes", nodes}, {"dimension", hd.dim()},
                {"companion", single.meta}, {"sup_abs_pe_minus_single", sup_diff},
                {"max_norm_deviation", norm_dev}, {"t_max", ctx.config.double_t_max}};
    write_json(out_path(ctx, "double_" + tag + ".json"), doc, written);
    ctx.log << "[cda]   sup|P_e - single| = " << sup_diff << ", norm deviation " << norm_dev << '\n';
  }
  return written;
}

Written run_fit(const Context& ctx) {
  if (!ctx.config.fit_input) throw ConfigError("fit: no input trajectory (fit.input or positional)");
  const auto traj = dynamics::read_csv(*ctx.config.fit_input);
  auto window = analysis::default_fit_window(traj, ctx.config.fit_seam);
  if (ctx.config.fit_t_lo) window.first = *ctx.config.fit_t_lo;
  if (ctx.config.fit_t_hi) window.second = *ctx.config.fit_t_hi;
  if (!(window.second > window.first)) throw ConfigError("fit: empty window");
  const auto fit = analysis::stretched_fit(traj, window.first, window.second);
  json doc = {{"input", ctx.config.fit_input->string()}, {"A", fit.A}, {"B", fit.B},
              {"beta", fit.beta}, {"residual", fit.residual},
              {"window", {fit.t_lo, fit.t_hi}}, {"iterations", fit.iterations},
              {"converged", fit.converged}};
  Written written;
  write_json(out_path(ctx, "fit_" + ctx.config.fit_input->stem().string() + ".json"), doc, written);
  ctx.log << "[cda] fit " << ctx.config.fit_input->filename().string() << ": B=" << fit.B
          << " A=" << fit.A << " beta=" << fit.beta << " rms=" << fit.residual << '\n';
  return written;
}

Written run_cache_build(const Context& ctx, const std::optional<std::filesystem::path>& export_csv) {
  if (real_rule(ctx)) throw ConfigError("cache build applies to contour.rule = complex");
  Written written;
  for (const int nodes : ctx.config.node_values) {
    const auto spec = contour_with(ctx, nodes);
    bool hit = false;
    const auto rule = ctx.store.contour_rule(spec, 1.0, &hit);
    const auto entry = ctx.store.rule_path(spec);
    ctx.log << "[cda] " << (hit ? "cached " : "built ") << entry.string() << '\n';
    if (ctx.store.enabled()) written.push_back(entry);
    if (!export_csv) continue;
    auto target = *export_csv;
    if (ctx.config.node_values.size() > 1) {
      target.replace_filename(export_csv->stem().string() + "_N" + std::to_string(nodes) +
                              export_csv->extension().string());
    }
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    std::ofstream out(target);
    if (!out) throw ConfigError("cannot write " + target.string());
    out.precision(17);
    out << "re_node,im_node,re_weight,im_weight\n";
    for (std::size_t i = 0; i < rule.size(); ++i) {
      out << rule.nodes[i].real() << ',' << rule.nodes[i].imag() << ',' << rule.weights[i].real()
          << ',' << rule.weights[i].imag() << '\n';
    }
    written.push_back(target);
  }
  return written;
}

}  // namespace cda::commands
