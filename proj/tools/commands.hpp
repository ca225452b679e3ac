#pragma once

// Subcommands of the rpf command-line tool. `run` is the whole program minus
// process setup so tests can drive it in-process.
//
// Exit codes: 0 success / all axioms pass, 1 an axiom failed, 2 input error,
// 3 budget not binding.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "rpf/rpf.hpp"

namespace rpf::cli {

using nlohmann::json;
namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kAxiomFailure = 1, kInputError = 2, kBudgetNotBinding = 3 };

inline constexpr std::uint64_t kDefaultSeed = 20240601;

struct Options {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  bool force = false;
};

/// Files a command wants written under --out; written together with a manifest.
class Outputs {
 public:
  void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

struct CommandResult {
  json stdout_json;
  int code = kOk;
  std::string stderr_text;
};

namespace detail {

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json load_spec(const Options& o, fs::path& base_dir) {
  if (o.spec.empty()) throw ParseError("--spec is required");
  const fs::path path(o.spec);
  if (!fs::exists(path)) throw ParseError("spec file not found: " + o.spec);
  base_dir = path.parent_path();
  return io::read_json(path);
}

inline std::uint64_t seed_for(const Options& o, const json& spec) {
  if (o.seed) return *o.seed;
  if (spec.is_object() && spec.contains("seed")) {
    if (!spec.at("seed").is_number_unsigned()) throw ParseError("seed must be a non-negative integer");
    return spec.at("seed").get<std::uint64_t>();
  }
  return kDefaultSeed;
}

/// "family" object, or a bare "noise" meaning the additive family.
inline PerformanceFamily family_of(const json& spec, const fs::path& base_dir) {
  if (spec.contains("family")) return io::family_from_json(spec.at("family"), base_dir);
  if (spec.contains("noise")) return PerformanceFamily::additive(io::noise_from_json(spec.at("noise"), base_dir));
  throw ParseError("spec needs a 'family' or a 'noise' object");
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline CommandResult cmd_cutoff(const Options& o, Outputs& files) {
  fs::path base;
  const auto spec = detail::load_spec(o, base);
  const double k = io::get_number(spec, "k", "cutoff spec");
  const auto fam = detail::family_of(spec, base);
  const auto p = io::measure_from_json(io::field(spec, "measure", "cutoff spec"), base);
  require_budget(k);
  require_binding(p, k);
  const auto r = solve_cutoff(fam, p, k);
  json w = json::array();
  for (const auto& a : p.atoms()) w.push_back({{"effort", io::num(a.effort)}, {"W", io::num(fam.survival(a.effort, r.s))}});
  json out = io::to_json(r);
  out["k"] = io::num(k);
  out["family"] = fam.description();
  out["W_at_atoms"] = w;
  files.add("cutoff.json", detail::dump(out));
  return {out, kOk, ""};
}

/// Builds the black box named in an axioms spec's "csf" object.
inline BlackBoxCsf csf_from_json(const json& j, const fs::path& base) {
  const std::string ctx = "csf";
  const auto kind = io::get_string(j, "kind", ctx);
  const double k = io::get_number(j, "k", ctx);
  if (kind == "rpf") return rpf_csf(detail::family_of(j, base), k);
  if (kind == "fixture") {
    const auto name = io::get_string(j, "name", ctx);
    if (name == "constant_share") return fixtures::constant_share(k);
    if (name == "proportional_capped") return fixtures::proportional_capped(k);
    if (name == "theta_exponent") return fixtures::theta_exponent(k, io::get_number_or(j, "threshold", 1.5, ctx));
    throw ParseError("csf: unknown fixture '" + name + "'");
  }
  throw ParseError("csf: unknown kind '" + kind + "'");
}

inline SamplerConfig sampler_from_json(const json& j, SamplerConfig cfg) {
  if (j.is_null()) return cfg;
  const std::string ctx = "sampler";
  cfg.samples = static_cast<std::size_t>(io::get_number_or(j, "samples", static_cast<double>(cfg.samples), ctx));
  cfg.tolerance = io::get_number_or(j, "tolerance", cfg.tolerance, ctx);
  cfg.effort_lo = io::get_number_or(j, "effort_lo", cfg.effort_lo, ctx);
  cfg.effort_hi = io::get_number_or(j, "effort_hi", cfg.effort_hi, ctx);
  cfg.max_atoms = static_cast<std::size_t>(io::get_number_or(j, "max_atoms", static_cast<double>(cfg.max_atoms), ctx));
  cfg.shift_lo = io::get_number_or(j, "shift_lo", cfg.shift_lo, ctx);
  cfg.shift_hi = io::get_number_or(j, "shift_hi", cfg.shift_hi, ctx);
  cfg.halvings = static_cast<int>(io::get_number_or(j, "halvings", cfg.halvings, ctx));
  if (cfg.samples < 1 || cfg.max_atoms < 1 || cfg.halvings < 1) throw ParseError("sampler: counts must be positive");
  if (!(cfg.effort_lo > 0.0 && cfg.effort_hi > cfg.effort_lo)) throw ParseError("sampler: need 0 < effort_lo < effort_hi");
  if (!(cfg.shift_lo > 0.0 && cfg.shift_hi >= cfg.shift_lo)) throw ParseError("sampler: need 0 < shift_lo <= shift_hi");
  if (!(cfg.tolerance > 0.0)) throw ParseError("sampler: tolerance must be positive");
  return cfg;
}

inline CommandResult cmd_axioms(const Options& o, Outputs& files) {
  fs::path base;
  const auto spec = detail::load_spec(o, base);
  const auto& csf = io::field(spec, "csf", "axioms spec");
  SamplerConfig cfg;
  cfg.seed = detail::seed_for(o, spec);
  cfg = sampler_from_json(spec.value("sampler", json()), cfg);
  if (o.tol) {
    if (!(*o.tol > 0.0)) throw ParseError("--tol must be positive");
    cfg.tolerance = *o.tol;
  }

  AxiomReport report;
  if (io::get_string(csf, "kind", "csf") == "tabulated") {
    const double k = io::get_number(csf, "k", "csf");
    require_budget(k);
    const auto& m = io::field(csf, "measures", "csf");
    const json measures = m.is_string() ? io::read_json(io::resolve(base, m.get<std::string>())) : m;
    const auto data = io::load_tabulated_csf(k, io::resolve(base, io::get_string(csf, "csv", "csf")), measures, base);
    report = audit_tabulated(data, cfg.tolerance);
    report.seed = cfg.seed;
  } else {
    const auto set_name = spec.value("set", std::string("all"));
    AxiomSet set = AxiomSet::all;
    if (set_name == "characterization") set = AxiomSet::characterization;
    else if (set_name == "shifts") set = AxiomSet::shifts;
    else if (set_name != "all") throw ParseError("set must be all, characterization or shifts");
    report = certify(csf_from_json(csf, base), cfg, set);
  }
  const auto out = io::to_json(report);
  const auto table = io::axiom_table(report);
  files.add("axioms.json", detail::dump(out));
  files.add("axioms.txt", table);
  return {out, report.all_pass() ? kOk : kAxiomFailure, table};
}

inline CommandResult cmd_equilibrium(const Options& o, Outputs& files) {
  fs::path base;
  const auto spec = io::contest_from_json(detail::load_spec(o, base), base);
  const auto r = solve_equilibrium(spec);
  json out{{"e_star", io::num(r.foc.e_star)},
           {"foc_residual", io::num(r.foc.residual)},
           {"soc_margin", io::num(r.soc.margin)},
           {"soc_pass", r.soc.pass},
           {"best_response", io::num(r.verdict.best_response)},
           {"payoff", io::num(r.verdict.payoff)},
           {"verified", r.verdict.verified}};
  std::string warn;
  if (!r.soc.pass) {
    out["warning"] = "second-order condition fails on the sampled grid; e_star is the first-order point only";
    warn = "warning: second-order condition fails (margin " + io::fmt15(r.soc.margin) + ")\n";
  }
  files.add("equilibrium.json", detail::dump(out));
  return {out, kOk, warn};
}

inline json argmax_json(const CurveArgmax& a) {
  return {{"k", io::num(a.k)}, {"value", io::num(a.value)}, {"boundary", a.boundary}};
}

inline CommandResult cmd_figure1(const Options& o, Outputs& files) {
  std::vector<double> grid = default_k_grid();
  if (!o.spec.empty()) {
    fs::path base;
    const auto spec = detail::load_spec(o, base);
    if (spec.contains("k_grid")) grid = io::grid_from_json(spec.at("k_grid"), "k_grid");
  }
  const std::vector<std::pair<std::string, NoiseDistribution>> panels = {
      {"normal", NoiseDistribution::normal()}, {"t3", NoiseDistribution::student_t(3)}, {"t1", NoiseDistribution::student_t(1)}};
  json out = json::object();
  for (const auto& [name, F] : panels) {
    files.add("figure1_" + name + ".csv", io::curve_csv(figure1_curve(F, grid), "hazard_value"));
    out[name] = {{"argmax", argmax_json(figure1_argmax(F, grid))}, {"points", grid.size()}};
  }
  return {out, kOk, ""};
}

inline json prop5_json(const Proposition5Result& r) {
  json out{{"verdict", to_string(r.verdict)}, {"detail", r.detail}, {"max_s_fprime", io::num(r.max_s_fprime)}};
  out["violating_k"] = r.violating_k ? io::num(*r.violating_k) : json(nullptr);
  return out;
}

inline CommandResult cmd_design(const Options& o, Outputs& files) {
  fs::path base;
  const auto j = detail::load_spec(o, base);
  const auto spec = io::design_from_json(j, base);
  const auto best = optimal_k(spec);
  DesignSpec upper = spec;
  upper.k_grid = j.contains("prop5_grid") ? io::grid_from_json(j.at("prop5_grid"), "prop5_grid") : numeric::linspace(0.5, 0.99, 64);
  json out{{"optimal_k", argmax_json(best)}, {"proposition5", prop5_json(proposition5_check(upper))}};
  files.add("effort_curve.csv", io::curve_csv(effort_curve(spec), "e_star"));
  files.add("design.json", detail::dump(out));
  return {out, kOk, ""};
}

inline CommandResult cmd_dissipation(const Options& o, Outputs& files) {
  fs::path base;
  const auto j = detail::load_spec(o, base);
  const std::string ctx = "dissipation spec";
  const double A = io::get_number_or(j, "A", 1.0, ctx);
  const double k = io::get_number(j, "k", ctx);
  const auto F = io::noise_from_json(io::field(j, "noise", ctx), base);
  const double vstar = dissipation_threshold(A, k, F);
  json out{{"A", io::num(A)}, {"k", io::num(k)}, {"threshold_V", io::num(vstar)}};
  std::vector<double> vs;
  if (j.contains("V")) vs.push_back(io::get_number(j, "V", ctx));
  if (j.contains("V_grid")) {
    const auto g = io::grid_from_json(j.at("V_grid"), "V_grid");
    vs.insert(vs.end(), g.begin(), g.end());
  }
  json rows = json::array();
  std::string csv = "V,ratio,ratio_via_equilibrium\n";
  for (double V : vs) {
    const double r = rent_dissipation_ratio(V, A, k, F);
    const double r2 = rent_dissipation_via_equilibrium(V, A, k, F);
    rows.push_back({{"V", io::num(V)},
                    {"ratio", io::num(r)},
                    {"ratio_via_equilibrium", io::num(r2)},
                    {"regime", r < 1.0 ? "under-dissipation" : (r > 1.0 ? "over-dissipation" : "full dissipation")}});
    csv += io::fmt15(V) + "," + io::fmt15(r) + "," + io::fmt15(r2) + "\n";
  }
  out["ratios"] = rows;
  files.add("dissipation.json", detail::dump(out));
  files.add("dissipation.csv", csv);
  return {out, kOk, ""};
}

inline CommandResult cmd_simulate(const Options& o, Outputs& files) {
  fs::path base;
  const auto j = detail::load_spec(o, base);
  const std::string ctx = "simulate spec";
  SimConfig cfg;
  cfg.n = static_cast<std::size_t>(io::get_number(j, "n", ctx));
  cfg.k = io::get_number(j, "k", ctx);
  cfg.replications = static_cast<std::size_t>(io::get_number_or(j, "replications", 20, ctx));
  cfg.seed = detail::seed_for(o, j);
  cfg.fam = detail::family_of(j, base);
  cfg.p = io::measure_from_json(io::field(j, "measure", ctx), base);
  require_binding(cfg.p, cfg.k);
  const auto r = simulate(cfg);
  json out = io::to_json(r);
  out["seed"] = cfg.seed;
  out["mean_abs_err"] = io::num(mean_abs_error(r));
  files.add("simulation.json", detail::dump(out));
  files.add("simulation.csv", io::sim_csv(r));
  if (j.contains("convergence")) {
    std::vector<std::size_t> ns;
    for (double n : io::get_numbers(j.at("convergence"), "convergence")) ns.push_back(static_cast<std::size_t>(n));
    const auto rows = convergence_table(cfg, ns);
    files.add("convergence.csv", io::convergence_csv(rows));
    out["convergence_slope"] = rows.size() >= 2 ? io::num(loglog_slope(rows)) : json(nullptr);
  }
  return {out, kOk, ""};
}

// ---------------------------------------------------------------------------

inline void write_outputs(const Options& o, const std::string& command, const Outputs& files) {
  const fs::path dir(o.out);
  json manifest{{"command", command}, {"out", o.out}, {"force", o.force}};
  manifest["inputs"] = o.spec.empty() ? json::array() : json::array({o.spec});
  manifest["seed"] = o.seed ? json(*o.seed) : json(nullptr);
  manifest["tolerance_override"] = o.tol ? io::num(*o.tol) : json(nullptr);
  json names = json::array();
  for (const auto& [name, _] : files.files()) names.push_back(name);
  manifest["outputs"] = names;

  std::vector<std::string> all;
  for (const auto& [name, _] : files.files()) all.push_back(name);
  all.push_back("manifest.json");
  if (!o.force) {
    for (const auto& name : all)
      if (fs::exists(dir / name)) throw ParseError("refusing to overwrite " + (dir / name).string() + " (pass --force)");
  }
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw ParseError("cannot write " + (dir / name).string());
    f << content;
  };
  for (const auto& [name, content] : files.files()) write(name, content);
  write("manifest.json", manifest.dump(2) + "\n");
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random performance functions: cutoffs, axiom audits, equilibria, prize design and simulation"};
  app.require_subcommand(1);
  Options o;
  using Handler = CommandResult (*)(const Options&, Outputs&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"cutoff", "market-clearing cutoff s(p) and W at the atoms of p", cmd_cutoff},
      {"axioms", "certify or falsify a CSF against the axioms", cmd_axioms},
      {"equilibrium", "symmetric equilibrium effort, second-order margin, verification", cmd_equilibrium},
      {"figure1", "hazard-value curves (1/k) f(F^-1(1-k)) for normal, t3 and t1 noise", cmd_figure1},
      {"design", "equilibrium effort as a function of k and the optimal k", cmd_design},
      {"dissipation", "rent-dissipation ratio and the prize where it reaches one", cmd_dissipation},
      {"simulate", "finite-population Monte Carlo against the continuum model", cmd_simulate},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, _] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--spec", o.spec, "JSON spec file");
    sub->add_option("--out", o.out, "output directory (files plus manifest.json)");
    sub->add_option("--seed", o.seed, "RNG seed");
    sub->add_option("--tol", o.tol, "tolerance override");
    sub->add_flag("--force", o.force, "overwrite existing output files");
    subs.push_back(sub);
  }

  std::vector<const char*> argv;
  argv.push_back("rpf");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    const auto& [name, help, handler] = commands[i];
    try {
      Outputs files;
      auto result = handler(o, files);
      if (!o.out.empty()) write_outputs(o, name, files);
      out << detail::dump(result.stdout_json);
      err << result.stderr_text;
      return result.code;
    } catch (const BudgetNotBinding& e) {
      err << e.what() << "\n";
      return kBudgetNotBinding;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kInputError;
    }
  }
  return kInputError;
}

}  // namespace rpf::cli
