#pragma once

// JSON and CSV reading/writing for specs, measures, reports and curves.
// Numbers are written with 15 significant digits.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpf/axioms.hpp"
#include "rpf/design.hpp"
#include "rpf/distributions.hpp"
#include "rpf/engine.hpp"
#include "rpf/equilibrium.hpp"
#include "rpf/errors.hpp"
#include "rpf/measures.hpp"
#include "rpf/monte_carlo.hpp"

namespace rpf::io {

using nlohmann::json;
namespace fs = std::filesystem;

inline std::string fmt15(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

/// A double rounded to 15 significant digits; non-finite values become null.
inline json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(fmt15(v).c_str(), nullptr);
}

// ---------------------------------------------------------------------------
// files

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // count lines up to the failing byte
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw ParseError(source + ": invalid JSON", line);
  }
}

inline json read_json(const fs::path& path) { return parse_json_text(read_text(path), path.string()); }

/// Rows of a CSV file with a header line. Blank lines and lines starting with
/// '#' are skipped. Each row keeps its 1-based line number.
struct CsvRow {
  std::size_t line;
  std::vector<std::string> cells;
};

inline std::vector<CsvRow> parse_csv(const std::string& text, std::size_t columns, const std::string& source) {
  std::vector<CsvRow> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    CsvRow row{no, {}};
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      row.cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (row.cells.size() != columns)
      throw ParseError(source + ": expected " + std::to_string(columns) + " columns, got " + std::to_string(row.cells.size()), no);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline double parse_double(const std::string& s, std::size_t line, const std::string& source) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) throw ParseError(source + ": not a finite number: '" + s + "'", line);
  return v;
}

// ---------------------------------------------------------------------------
// JSON field helpers

inline const json& field(const json& j, const char* name, const std::string& ctx) {
  if (!j.is_object() || !j.contains(name)) throw ParseError(ctx + ": missing field '" + name + "'");
  return j.at(name);
}

inline double get_number(const json& j, const char* name, const std::string& ctx) {
  const auto& v = field(j, name, ctx);
  if (!v.is_number()) throw ParseError(ctx + ": field '" + name + "' must be a number");
  return v.get<double>();
}

inline double get_number_or(const json& j, const char* name, double fallback, const std::string& ctx) {
  return j.is_object() && j.contains(name) ? get_number(j, name, ctx) : fallback;
}

inline std::string get_string(const json& j, const char* name, const std::string& ctx) {
  const auto& v = field(j, name, ctx);
  if (!v.is_string()) throw ParseError(ctx + ": field '" + name + "' must be a string");
  return v.get<std::string>();
}

inline std::vector<double> get_numbers(const json& v, const std::string& ctx) {
  if (!v.is_array()) throw ParseError(ctx + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ParseError(ctx + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline fs::path resolve(const fs::path& base_dir, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

// ---------------------------------------------------------------------------
// noise distributions

/// CSV with header and columns x,cdf.
inline NoiseDistribution load_tabulated_cdf(const fs::path& path, bool has_density = false) {
  const auto rows = parse_csv(read_text(path), 2, path.string());
  std::vector<double> xs, fs_;
  for (const auto& r : rows) {
    xs.push_back(parse_double(r.cells[0], r.line, path.string()));
    fs_.push_back(parse_double(r.cells[1], r.line, path.string()));
    if (xs.size() > 1 && !(xs.back() > xs[xs.size() - 2]))
      throw ParseError(path.string() + ": x must be strictly increasing", r.line);
    if (fs_.back() < 0.0 || fs_.back() > 1.0) throw ParseError(path.string() + ": cdf outside [0, 1]", r.line);
  }
  try {
    return NoiseDistribution::tabulated(std::move(xs), std::move(fs_), has_density);
  } catch (const DomainError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline NoiseDistribution noise_from_json(const json& j, const fs::path& base_dir = ".") {
  const std::string ctx = "noise";
  const auto kind = get_string(j, "kind", ctx);
  NoiseDistribution d = NoiseDistribution::normal();
  if (kind == "normal") {
  } else if (kind == "student_t") {
    d = NoiseDistribution::student_t(get_number(j, "nu", ctx));
  } else if (kind == "logistic") {
    d = NoiseDistribution::logistic(get_number_or(j, "scale", 1.0, ctx));
  } else if (kind == "tabulated") {
    const bool density = j.value("density", false);
    if (j.contains("csv")) {
      d = load_tabulated_cdf(resolve(base_dir, get_string(j, "csv", ctx)), density);
    } else {
      d = NoiseDistribution::tabulated(get_numbers(field(j, "x", ctx), ctx + ".x"), get_numbers(field(j, "cdf", ctx), ctx + ".cdf"),
                                       density);
    }
  } else {
    throw ParseError("noise: unknown kind '" + kind + "'");
  }
  if (j.contains("shift")) d = shift_distribution(d, get_number(j, "shift", ctx));
  return d;
}

/// The inverse of noise_from_json for built-ins (tabulated tables are inlined).
inline json to_json(const NoiseDistribution& d) { return json{{"description", d.description()}, {"kind", d.kind_name()}}; }

// ---------------------------------------------------------------------------
// families

inline PerformanceFamily family_from_json(const json& j, const fs::path& base_dir = ".") {
  const std::string ctx = "family";
  const auto noise = noise_from_json(field(j, "noise", ctx), base_dir);
  const auto kind = j.value("kind", std::string("additive"));
  if (kind == "additive") return PerformanceFamily::additive(noise);
  if (kind != "warped") throw ParseError("family: unknown kind '" + kind + "'");
  const auto& warp = field(j, "warp", ctx);
  PerformanceFamily fam = PerformanceFamily::additive(noise);
  if (warp.is_string()) {
    const auto name = warp.get<std::string>();
    if (name == "log") fam = PerformanceFamily::warped(noise, [](double e) { return std::log(e); }, "log");
    else if (name == "sqrt") fam = PerformanceFamily::warped(noise, [](double e) { return std::sqrt(e); }, "sqrt");
    else if (name == "identity") fam = PerformanceFamily::warped(noise, [](double e) { return e; }, "identity");
    else throw ParseError("family: unknown warp '" + name + "'");
  } else if (warp.is_object() && warp.contains("power")) {
    const double r = get_number(warp, "power", "family.warp");
    if (!(r > 0.0)) throw ParseError("family.warp: power must be positive");
    fam = PerformanceFamily::warped(noise, [r](double e) { return std::pow(e, r); }, "e^" + fmt15(r));
  } else {
    throw ParseError("family: warp must be a name or {\"power\": r}");
  }
  validate_family(fam);
  return fam;
}

// ---------------------------------------------------------------------------
// measures

/// CSV with header and columns effort,mass.
inline EffortMeasure load_atoms_csv(const fs::path& path) {
  const auto rows = parse_csv(read_text(path), 2, path.string());
  std::vector<Atom> atoms;
  for (const auto& r : rows) {
    const double e = parse_double(r.cells[0], r.line, path.string());
    const double m = parse_double(r.cells[1], r.line, path.string());
    if (!(e > 0.0)) throw ParseError(path.string() + ": effort must be positive", r.line);
    if (m < 0.0) throw ParseError(path.string() + ": mass must be non-negative", r.line);
    atoms.push_back({e, m});
  }
  try {
    return EffortMeasure(std::move(atoms));
  } catch (const DomainError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

/// {"atoms": [[e, m], ...] or [{"effort": e, "mass": m}, ...],
///  "segments": [{"grid": [...], "weights": [...]}], "csv": "atoms.csv"}
inline EffortMeasure measure_from_json(const json& j, const fs::path& base_dir = ".") {
  const std::string ctx = "measure";
  if (!j.is_object()) throw ParseError("measure must be an object");
  if (j.contains("csv")) return load_atoms_csv(resolve(base_dir, get_string(j, "csv", ctx)));
  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    for (const auto& a : j.at("atoms")) {
      if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number()) {
        atoms.push_back({a[0].get<double>(), a[1].get<double>()});
      } else if (a.is_object()) {
        atoms.push_back({get_number(a, "effort", "measure.atoms"), get_number(a, "mass", "measure.atoms")});
      } else {
        throw ParseError("measure.atoms: each atom is [effort, mass] or {effort, mass}");
      }
    }
  }
  std::vector<DensitySegment> segments;
  if (j.contains("segments")) {
    for (const auto& s : j.at("segments"))
      segments.push_back({get_numbers(field(s, "grid", "measure.segments"), "grid"), get_numbers(field(s, "weights", "measure.segments"), "weights")});
  }
  return EffortMeasure(std::move(atoms), std::move(segments));
}

inline json to_json(const EffortMeasure& p) {
  json atoms = json::array();
  for (const auto& a : p.atoms()) atoms.push_back(json::array({num(a.effort), num(a.mass)}));
  json out{{"atoms", atoms}};
  if (!p.segments().empty()) {
    json segs = json::array();
    for (const auto& s : p.segments()) {
      json g = json::array(), w = json::array();
      for (double x : s.grid) g.push_back(num(x));
      for (double x : s.weights) w.push_back(num(x));
      segs.push_back({{"grid", g}, {"weights", w}});
    }
    out["segments"] = segs;
  }
  return out;
}

// ---------------------------------------------------------------------------
// results

inline json to_json(const CutoffResult& r) {
  return {{"s", num(r.s)}, {"residual", num(r.residual)}, {"iterations", r.iterations}};
}

inline json to_json(const Witness& w) {
  json out = json::object();
  for (const auto& [name, v] : w.scalars) out[name] = num(v);
  for (const auto& [name, m] : w.measures) out[name] = to_json(m);
  return out;
}

inline json to_json(const AxiomEntry& e) {
  json out{{"axiom", e.axiom},       {"verdict", to_string(e.verdict)}, {"samples", e.samples}, {"skipped", e.skipped},
           {"stream_seed", e.seed}, {"tolerance", num(e.tolerance)},   {"detail", e.detail}};
  out["witness"] = e.witness ? to_json(*e.witness) : json(nullptr);
  return out;
}

inline json to_json(const AxiomReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) entries.push_back(to_json(e));
  return {{"csf", r.csf}, {"k", num(r.k)}, {"seed", r.seed}, {"all_pass", r.all_pass()}, {"entries", entries}};
}

inline std::string axiom_table(const AxiomReport& r) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-26s %-13s %8s %8s\n", "axiom", "verdict", "samples", "skipped");
  out << buf;
  for (const auto& e : r.entries) {
    std::snprintf(buf, sizeof buf, "%-26s %-13s %8zu %8zu\n", e.axiom.c_str(), to_string(e.verdict), e.samples, e.skipped);
    out << buf;
    if (e.witness) {
      out << "    " << e.detail << "\n";
      for (const auto& [name, v] : e.witness->scalars) out << "    " << name << " = " << fmt15(v) << "\n";
      for (const auto& [name, m] : e.witness->measures) out << "    " << name << " = " << to_json(m).dump() << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// contest and design specs

inline CostFunction cost_from_json(const json& j) {
  const std::string ctx = "cost";
  const auto kind = j.value("kind", std::string("power"));
  if (kind == "quadratic") return CostFunction::quadratic(get_number_or(j, "A", 1.0, ctx));
  if (kind == "power") return CostFunction::power(get_number_or(j, "A", 1.0, ctx), get_number_or(j, "beta", 2.0, ctx));
  throw ParseError("cost: unknown kind '" + kind + "' (custom costs are library-only)");
}

inline Utility utility_from_json(const json& j) {
  const auto kind = j.value("kind", std::string("linear"));
  if (kind == "linear") return Utility::linear();
  if (kind == "power") return Utility::power(get_number(j, "rho", "utility"));
  throw ParseError("utility: unknown kind '" + kind + "'");
}

/// {k, V | B, cost, utility, noise}
inline ContestSpec contest_from_json(const json& j, const fs::path& base_dir = ".") {
  const std::string ctx = "contest spec";
  const double k = get_number(j, "k", ctx);
  const auto cost = j.contains("cost") ? cost_from_json(j.at("cost")) : CostFunction::quadratic();
  const auto u = j.contains("utility") ? utility_from_json(j.at("utility")) : Utility::linear();
  const auto noise = noise_from_json(field(j, "noise", ctx), base_dir);
  if (j.contains("V") == j.contains("B")) throw ParseError(ctx + ": give exactly one of V or B");
  if (j.contains("V")) return ContestSpec(k, get_number(j, "V", ctx), cost, u, noise);
  return ContestSpec::from_purse(k, get_number(j, "B", ctx), cost, u, noise);
}

/// Either an explicit array or {"lo", "hi", "points", "spacing": "log" | "linear"}.
inline std::vector<double> grid_from_json(const json& j, const std::string& ctx) {
  if (j.is_array()) return get_numbers(j, ctx);
  const double lo = get_number(j, "lo", ctx), hi = get_number(j, "hi", ctx);
  const auto points = static_cast<std::size_t>(get_number(j, "points", ctx));
  const auto spacing = j.value("spacing", std::string("log"));
  if (points < 2) throw ParseError(ctx + ": need at least 2 points");
  if (spacing == "log") return numeric::logspace(lo, hi, points);
  if (spacing == "linear") return numeric::linspace(lo, hi, points);
  throw ParseError(ctx + ": spacing must be log or linear");
}

inline DesignSpec design_from_json(const json& j, const fs::path& base_dir = ".") {
  DesignSpec spec;
  spec.B = get_number_or(j, "B", 1.0, "design spec");
  if (j.contains("noise")) spec.noise = noise_from_json(j.at("noise"), base_dir);
  if (j.contains("utility")) spec.utility = utility_from_json(j.at("utility"));
  if (j.contains("cost")) spec.cost = cost_from_json(j.at("cost"));
  if (j.contains("k_grid")) spec.k_grid = grid_from_json(j.at("k_grid"), "k_grid");
  return spec;
}

// ---------------------------------------------------------------------------
// tabulated CSF data: CSV effort,measure_id,win_rate plus measures JSON

inline TabulatedCsf load_tabulated_csf(double k, const fs::path& csv, const json& measures, const fs::path& base_dir = ".") {
  TabulatedCsf data;
  data.k = k;
  if (!measures.is_object()) throw ParseError("measures must be an object mapping id to measure");
  for (const auto& [id, m] : measures.items()) data.measures.emplace(id, measure_from_json(m, base_dir));
  for (const auto& r : parse_csv(read_text(csv), 3, csv.string())) {
    const double e = parse_double(r.cells[0], r.line, csv.string());
    const double w = parse_double(r.cells[2], r.line, csv.string());
    if (!(e > 0.0)) throw ParseError(csv.string() + ": effort must be positive", r.line);
    if (w < 0.0 || w > 1.0) throw ParseError(csv.string() + ": win rate outside [0, 1]", r.line);
    if (!data.measures.count(r.cells[1])) throw ParseError(csv.string() + ": unknown measure id '" + r.cells[1] + "'", r.line);
    data.rows.push_back({e, r.cells[1], w});
  }
  return data;
}

// ---------------------------------------------------------------------------
// CSV writers

inline std::string curve_csv(const std::vector<CurvePoint>& curve, const char* value_name = "value") {
  std::string out = std::string("k,") + value_name + "\n";
  for (const auto& p : curve) out += fmt15(p.k) + "," + fmt15(p.value) + "\n";
  return out;
}

inline json to_json(const SimResult& r) {
  json atoms = json::array();
  for (const auto& a : r.atoms)
    atoms.push_back({{"atom_e", num(a.effort)},
                     {"mass", num(a.mass)},
                     {"empirical_W", num(a.empirical_W)},
                     {"model_W", num(a.model_W)},
                     {"abs_err", num(a.abs_err)},
                     {"agents", a.agents},
                     {"wins", a.wins}});
  json winners = json::array();
  for (const auto& rep : r.replications) winners.push_back(rep.winners);
  return {{"atoms", atoms},
          {"cutoff_estimate", num(r.cutoff_estimate)},
          {"cutoff_model", num(r.cutoff_model)},
          {"winners_expected", r.winners_expected},
          {"winners_per_replication", winners}};
}

inline std::string sim_csv(const SimResult& r) {
  std::string out = "atom_e,empirical_W,model_W,abs_err\n";
  for (const auto& a : r.atoms) out += fmt15(a.effort) + "," + fmt15(a.empirical_W) + "," + fmt15(a.model_W) + "," + fmt15(a.abs_err) + "\n";
  return out;
}

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "n,mean_err,sd\n";
  for (const auto& r : rows) out += std::to_string(r.n) + "," + fmt15(r.mean_err) + "," + fmt15(r.sd) + "\n";
  return out;
}

}  // namespace rpf::io
