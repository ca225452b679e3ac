#pragma once

// Sampling-based certification / falsification of a black-box contest success
// function against the RPF characterization axioms and the two shift axioms
// that single out additive noise.
//
// A pass means "no violation found at this sample size and resolution". In
// particular continuity is only probed by a halving-ratio test: a pass says no
// discontinuity was detected at the finest bisection width reached.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rpf/engine.hpp"
#include "rpf/measures.hpp"
#include "rpf/numeric.hpp"
#include "rpf/verdict.hpp"

namespace rpf {

/// W(e, p) behind an opaque interface. `bind(p)` returns W(., p) so that any
/// per-measure work (e.g. solving a cutoff) happens once.
class BlackBoxCsf {
 public:
  using Evaluator = std::function<double(double)>;
  using Binder = std::function<Evaluator(const EffortMeasure&)>;

  BlackBoxCsf(double k, Binder bind, std::string name = "black box")
      : k_(k), bind_(std::move(bind)), name_(std::move(name)) {
    require_budget(k);
  }

  static BlackBoxCsf pointwise(double k, std::function<double(double, const EffortMeasure&)> w, std::string name) {
    return BlackBoxCsf(
        k, [w = std::move(w)](const EffortMeasure& p) -> Evaluator { return [w, p](double e) { return w(e, p); }; },
        std::move(name));
  }

  double k() const { return k_; }
  const std::string& name() const { return name_; }
  Evaluator bind(const EffortMeasure& p) const { return bind_(p); }
  double operator()(double e, const EffortMeasure& p) const { return bind_(p)(e); }

 private:
  double k_;
  Binder bind_;
  std::string name_;
};

/// Engine-backed RPF as a black box.
template <PerformanceFamilyLike Family>
BlackBoxCsf rpf_csf(Family fam, double k, std::string name = "") {
  if (name.empty()) {
    if constexpr (requires { fam.description(); }) name = fam.description();
    else name = "rpf";
  }
  return BlackBoxCsf(
      k,
      [fam = std::move(fam), k](const EffortMeasure& p) -> BlackBoxCsf::Evaluator {
        auto bound = std::make_shared<const BoundCsf<Family>>(fam, p, k);
        return [bound](double e) { return (*bound)(e); };
      },
      std::move(name));
}

namespace fixtures {

/// W = k / p(E): clears the market but ignores effort.
inline BlackBoxCsf constant_share(double k) {
  return BlackBoxCsf::pointwise(
      k, [k](double, const EffortMeasure& p) { return std::min(1.0, k / p.total_mass()); }, "constant share k/p(E)");
}

/// W = min(1, k e / integral of e dp); clears only while the cap does not bind.
inline BlackBoxCsf proportional_capped(double k) {
  return BlackBoxCsf::pointwise(
      k,
      [k](double e, const EffortMeasure& p) {
        return std::min(1.0, k * e / p.integrate([](double x) { return x; }));
      },
      "proportional capped");
}

/// W = k e^theta / integral of e^theta dp with theta = 1 if mean(p) < threshold
/// else 3 (capped at 1). The exponent switch makes rankings depend on p, which
/// breaks co-monotonicity.
inline BlackBoxCsf theta_exponent(double k, double threshold = 1.5) {
  return BlackBoxCsf::pointwise(
      k,
      [k, threshold](double e, const EffortMeasure& p) {
        const double theta = p.mean_effort() < threshold ? 1.0 : 3.0;
        const double norm = p.integrate([theta](double x) { return std::pow(x, theta); });
        return std::min(1.0, k * std::pow(e, theta) / norm);
      },
      "p-dependent exponent");
}

/// `base` with W raised by `size` (capped at 1) for e >= at.
inline BlackBoxCsf planted_effort_jump(BlackBoxCsf base, double at = 1.0, double size = 0.2) {
  const double k = base.k();
  return BlackBoxCsf(
      k,
      [base, at, size](const EffortMeasure& p) -> BlackBoxCsf::Evaluator {
        auto w = base.bind(p);
        return [w, at, size](double e) { return e >= at ? std::min(1.0, w(e) + size) : w(e); };
      },
      "planted jump at e=" + std::to_string(at));
}

/// `base` with W lowered by `size` whenever p(E) exceeds `mass_threshold`.
inline BlackBoxCsf planted_mass_jump(BlackBoxCsf base, double mass_threshold, double size = 0.2) {
  const double k = base.k();
  return BlackBoxCsf(
      k,
      [base, mass_threshold, size](const EffortMeasure& p) -> BlackBoxCsf::Evaluator {
        auto w = base.bind(p);
        const bool drop = p.total_mass() > mass_threshold;
        return [w, drop, size](double e) { return drop ? std::max(0.0, w(e) - size) : w(e); };
      },
      "planted jump in p(E)");
}

}  // namespace fixtures

struct SamplerConfig {
  std::uint64_t seed = 20240601;
  std::size_t samples = 1000;
  double tolerance = 1e-6;
  double effort_lo = 0.1;
  double effort_hi = 10.0;
  std::size_t max_atoms = 4;
  double shift_lo = 0.1;
  double shift_hi = 5.0;
  int halvings = 6;
  /// Extra halvings spent confirming a cell whose screening ratio looked like a jump.
  int confirm_halvings = 34;
  /// Average per-halving shrink factor above which a continuity probe is a failure.
  double halving_ratio_limit = 0.75;
};

/// The violating tuple: named scalars (efforts, alpha, shift, evaluated W
/// values) and named measures.
struct Witness {
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<std::pair<std::string, EffortMeasure>> measures;

  Witness& set(std::string name, double v) {
    scalars.emplace_back(std::move(name), v);
    return *this;
  }
  Witness& set(std::string name, EffortMeasure m) {
    measures.emplace_back(std::move(name), std::move(m));
    return *this;
  }
  double scalar(const std::string& name) const {
    for (const auto& [n, v] : scalars)
      if (n == name) return v;
    throw std::out_of_range("witness has no scalar " + name);
  }
  const EffortMeasure& measure(const std::string& name) const {
    for (const auto& [n, m] : measures)
      if (n == name) return m;
    throw std::out_of_range("witness has no measure " + name);
  }
};

struct AxiomEntry {
  std::string axiom;
  Verdict verdict = Verdict::pass;
  std::size_t samples = 0;
  std::size_t skipped = 0;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  std::string detail;
  std::optional<Witness> witness;
};

struct AxiomReport {
  std::string csf;
  double k = 0.0;
  std::uint64_t seed = 0;
  std::vector<AxiomEntry> entries;

  bool all_pass() const {
    return std::none_of(entries.begin(), entries.end(), [](const auto& e) { return e.verdict == Verdict::fail; });
  }
  const AxiomEntry* find(const std::string& axiom) const {
    for (const auto& e : entries)
      if (e.axiom == axiom) return &e;
    return nullptr;
  }
};

namespace axiom_names {
inline constexpr const char* market_clearing = "market_clearing";
inline constexpr const char* e_continuity = "e_continuity";
inline constexpr const char* p_continuity = "p_continuity";
inline constexpr const char* monotonicity = "monotonicity";
inline constexpr const char* competitiveness = "competitiveness";
inline constexpr const char* co_monotonicity = "co_monotonicity";
inline constexpr const char* common_shifts = "invariance_common_shifts";
inline constexpr const char* p_shifts = "invariance_p_shifts";
}  // namespace axiom_names

namespace detail {

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return numeric::splitmix64(seed ^ numeric::splitmix64(stream + 1));
}

/// Draws efforts, shifts and measures in Delta_k per SamplerConfig.
class MeasureSampler {
 public:
  MeasureSampler(const SamplerConfig& cfg, double k, std::uint64_t stream)
      : cfg_(cfg), k_(k), rng_(stream_seed(cfg.seed, stream)) {}

  double unit() { return numeric::open_unit(rng_()); }

  double log_uniform(double lo, double hi) { return lo * std::pow(hi / lo, unit()); }

  double effort() { return log_uniform(cfg_.effort_lo, cfg_.effort_hi); }
  double shift() { return log_uniform(cfg_.shift_lo, cfg_.shift_hi); }

  /// 1..max_atoms atoms, log-uniform efforts, total mass uniform in (k, 1].
  EffortMeasure measure() {
    const std::size_t n = 1 + static_cast<std::size_t>(unit() * static_cast<double>(cfg_.max_atoms));
    std::vector<Atom> atoms;
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < std::min(n, cfg_.max_atoms); ++i) {
      const double w = -std::log(unit());
      atoms.push_back({effort(), w});
      weight_sum += w;
    }
    const double mass = k_ + (1.0 - k_) * (1.0 - unit() * (1.0 - 1e-9));
    for (auto& a : atoms) a.mass *= mass / weight_sum;
    return EffortMeasure(std::move(atoms));
  }

 private:
  const SamplerConfig& cfg_;
  double k_;
  std::mt19937_64 rng_;
};

struct ContinuityProbe {
  double lo;
  double hi;
  double flo;
  double fhi;
  double last_change;
  double mean_ratio;
  int halvings;
};

/// Bisects [lo, hi] `halvings` times, always keeping the half where f changes
/// more. For smooth f the change shrinks ~2x per halving; at a jump it does not.
template <class F>
ContinuityProbe probe_interval(F&& f, double lo, double hi, double flo, double fhi, int halvings) {
  double d = std::abs(fhi - flo);
  // Baseline is the largest change seen before the last halving: near an
  // interior extremum the endpoint difference understates the variation.
  double baseline = 0.0;
  for (int i = 0; i < halvings; ++i) {
    baseline = std::max(baseline, d);
    const double mid = lo + 0.5 * (hi - lo);
    const double fm = f(mid);
    const double left = std::abs(fm - flo);
    const double right = std::abs(fhi - fm);
    if (left >= right) {
      hi = mid;
      fhi = fm;
      d = left;
    } else {
      lo = mid;
      flo = fm;
      d = right;
    }
  }
  const double ratio = baseline > 0.0 ? std::pow(d / baseline, 1.0 / halvings) : 0.0;
  return {lo, hi, flo, fhi, d, ratio, halvings};
}

/// Screening probe plus confirmation. A steep but smooth stretch can look like a
/// jump over the first few halvings, so a suspicious cell is refined further and
/// counts as discontinuous only if the change survives above tolerance.
template <class F>
std::optional<ContinuityProbe> find_jump(F&& f, double lo, double hi, double flo, double fhi,
                                         const SamplerConfig& cfg, double& worst_ratio) {
  const auto screen = probe_interval(f, lo, hi, flo, fhi, cfg.halvings);
  if (screen.last_change <= cfg.tolerance) return std::nullopt;
  worst_ratio = std::max(worst_ratio, screen.mean_ratio);
  if (screen.mean_ratio <= cfg.halving_ratio_limit) return std::nullopt;
  auto confirm = probe_interval(f, screen.lo, screen.hi, screen.flo, screen.fhi, cfg.confirm_halvings);
  if (confirm.last_change <= cfg.tolerance) return std::nullopt;
  confirm.mean_ratio = screen.mean_ratio;
  confirm.halvings += screen.halvings;
  return confirm;
}

inline AxiomEntry make_entry(const char* axiom, const SamplerConfig& cfg, std::uint64_t stream) {
  AxiomEntry e;
  e.axiom = axiom;
  e.seed = stream_seed(cfg.seed, stream);
  e.tolerance = cfg.tolerance;
  return e;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

/// |integral W(e,p) dp(e) - k| <= tolerance for every sampled p.
inline AxiomEntry check_market_clearing(const BlackBoxCsf& w, const SamplerConfig& cfg) {
  auto entry = detail::make_entry(axiom_names::market_clearing, cfg, 0);
  detail::MeasureSampler sampler(cfg, w.k(), 0);
  double worst = 0.0;
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const auto p = sampler.measure();
    const auto bound = w.bind(p);
    const double integral = p.integrate(bound);
    const double err = std::abs(integral - w.k());
    worst = std::max(worst, err);
    ++entry.samples;
    if (err > cfg.tolerance) {
      entry.verdict = Verdict::fail;
      entry.witness = Witness{}.set("p", p).set("integral", integral).set("k", w.k());
      entry.detail = "integral of W over p is " + detail::fmt(integral) + ", budget " + detail::fmt(w.k());
      return entry;
    }
  }
  entry.detail = "max clearing error " + detail::fmt(worst);
  return entry;
}

/// W(., p) strictly increasing with limit 1. Strictness is judged on exact
/// comparisons away from values that have saturated at 0 or 1; the limit uses
/// the ladder e = (1 + max effort of p) * 10^j with slack 10^-j, j = 1..3.
inline AxiomEntry check_monotonicity(const BlackBoxCsf& w, const SamplerConfig& cfg) {
  auto entry = detail::make_entry(axiom_names::monotonicity, cfg, 1);
  detail::MeasureSampler sampler(cfg, w.k(), 1);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const auto p = sampler.measure();
    double e1 = sampler.effort();
    double e2 = sampler.effort();
    if (e1 > e2) std::swap(e1, e2);
    ++entry.samples;
    const auto bound = w.bind(p);
    if (e1 < e2) {
      const double w1 = bound(e1);
      const double w2 = bound(e2);
      const bool decreases = w1 - w2 > cfg.tolerance;
      const bool flat = w1 >= w2 && w2 < 1.0 && w1 > 0.0;
      if (decreases || flat) {
        entry.verdict = Verdict::fail;
        entry.witness = Witness{}.set("e", e1).set("e_prime", e2).set("p", p).set("W(e,p)", w1).set("W(e_prime,p)", w2);
        entry.detail = decreases ? "W decreases in effort" : "W is not strictly increasing in effort";
        return entry;
      }
    }
    double rung = 1.0 + p.max_effort();
    double slack = 1.0;
    for (int j = 1; j <= 3; ++j) {
      rung *= 10.0;
      slack /= 10.0;
      const double v = bound(rung);
      if (v < 1.0 - slack) {
        entry.verdict = Verdict::fail;
        entry.witness = Witness{}.set("e", rung).set("p", p).set("W(e,p)", v).set("slack", slack);
        entry.detail = "W(e,p) stays below 1 - " + detail::fmt(slack) + " on the effort ladder";
        return entry;
      }
    }
  }
  entry.detail = "no decrease or flat step; limit ladder reached 1 - 1e-3";
  return entry;
}

/// W(e, delta_ebar) -> 0: ladder ebar = (1 + e) * 10^j must give W <= 10^-j.
inline AxiomEntry check_competitiveness(const BlackBoxCsf& w, const SamplerConfig& cfg) {
  auto entry = detail::make_entry(axiom_names::competitiveness, cfg, 2);
  detail::MeasureSampler sampler(cfg, w.k(), 2);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const double e = sampler.effort();
    ++entry.samples;
    double rung = 1.0 + e;
    double slack = 1.0;
    for (int j = 1; j <= 3; ++j) {
      rung *= 10.0;
      slack /= 10.0;
      const double v = w(e, dirac(rung));
      if (v > slack) {
        entry.verdict = Verdict::fail;
        entry.witness = Witness{}.set("e", e).set("ebar", rung).set("W(e,delta_ebar)", v).set("slack", slack);
        entry.detail = "W(e, delta_ebar) does not fall below " + detail::fmt(slack);
        return entry;
      }
    }
  }
  entry.detail = "W(e, delta_ebar) fell below 1e-3 on every ladder";
  return entry;
}

/// If W(e,p) >= W(e,p') (by more than tolerance), then W(e',p) >= W(e',p')
/// - tolerance on a 33-point log grid of e'.
inline AxiomEntry check_comonotonicity(const BlackBoxCsf& w, const SamplerConfig& cfg) {
  auto entry = detail::make_entry(axiom_names::co_monotonicity, cfg, 3);
  detail::MeasureSampler sampler(cfg, w.k(), 3);
  const auto sweep = numeric::logspace(cfg.effort_lo, cfg.effort_hi, 33);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const double e = sampler.effort();
    auto p = sampler.measure();
    auto q = sampler.measure();
    ++entry.samples;
    auto wp = w.bind(p);
    auto wq = w.bind(q);
    double vp = wp(e);
    double vq = wq(e);
    if (std::abs(vp - vq) < cfg.tolerance) {
      ++entry.skipped;
      continue;
    }
    if (vp < vq) {
      std::swap(p, q);
      std::swap(wp, wq);
      std::swap(vp, vq);
    }
    for (double e2 : sweep) {
      const double a = wp(e2);
      const double b = wq(e2);
      if (a < b - cfg.tolerance) {
        entry.verdict = Verdict::fail;
        entry.witness = Witness{}
                            .set("e", e)
                            .set("e_prime", e2)
                            .set("p", p)
                            .set("p_prime", q)
                            .set("W(e,p)", vp)
                            .set("W(e,p_prime)", vq)
                            .set("W(e_prime,p)", a)
                            .set("W(e_prime,p_prime)", b);
        entry.detail = "ranking of p against p_prime flips between e and e_prime";
        return entry;
      }
    }
  }
  entry.detail = "no ranking reversal across the effort sweep";
  return entry;
}

/// Halving-ratio probe on every cell of a 33-point log effort grid.
inline AxiomEntry check_e_continuity(const BlackBoxCsf& w, const SamplerConfig& cfg) {
  auto entry = detail::make_entry(axiom_names::e_continuity, cfg, 4);
  detail::MeasureSampler sampler(cfg, w.k(), 4);
  const auto grid = numeric::logspace(cfg.effort_lo, cfg.effort_hi, 33);
  double worst_ratio = 0.0;
  const double finest = (grid[1] - grid[0]) / std::pow(2.0, cfg.halvings);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const auto p = sampler.measure();
    const auto bound = w.bind(p);
    ++entry.samples;
    std::vector<double> values(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) values[j] = bound(grid[j]);
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
      if (std::abs(values[j + 1] - values[j]) <= cfg.tolerance) continue;
      const auto jump = detail::find_jump(bound, grid[j], grid[j + 1], values[j], values[j + 1], cfg, worst_ratio);
      if (jump) {
        entry.verdict = Verdict::fail;
        entry.witness = Witness{}
                            .set("e", jump->lo)
                            .set("e_prime", jump->hi)
                            .set("p", p)
                            .set("W(e,p)", jump->flo)
                            .set("W(e_prime,p)", jump->fhi)
                            .set("halving_ratio", jump->mean_ratio);
        entry.detail = "jump of " + detail::fmt(jump->last_change) + " persists down to width " +
                       detail::fmt(jump->hi - jump->lo);
        return entry;
      }
    }
  }
  entry.detail = "max halving ratio " + detail::fmt(worst_ratio) + "; no discontinuity detected at resolution " +
                 detail::fmt(finest);
  return entry;
}

/// Halving-ratio probe of alpha -> W(e, alpha p + (1 - alpha) p') on a 9-point alpha grid.
inline AxiomEntry check_p_continuity(const BlackBoxCsf& w, const SamplerConfig& cfg) {
  auto entry = detail::make_entry(axiom_names::p_continuity, cfg, 5);
  detail::MeasureSampler sampler(cfg, w.k(), 5);
  const auto alphas = numeric::linspace(0.0, 1.0, 9);
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const double e = sampler.effort();
    const auto p = sampler.measure();
    const auto q = sampler.measure();
    ++entry.samples;
    auto path = [&](double alpha) { return w(e, mix(alpha, p, q)); };
    std::vector<double> values(alphas.size());
    for (std::size_t j = 0; j < alphas.size(); ++j) values[j] = path(alphas[j]);
    for (std::size_t j = 0; j + 1 < alphas.size(); ++j) {
      if (std::abs(values[j + 1] - values[j]) <= cfg.tolerance) continue;
      const auto jump = detail::find_jump(path, alphas[j], alphas[j + 1], values[j], values[j + 1], cfg, worst_ratio);
      if (jump) {
        entry.verdict = Verdict::fail;
        entry.witness = Witness{}
                            .set("e", e)
                            .set("p", p)
                            .set("p_prime", q)
                            .set("alpha", jump->lo)
                            .set("alpha_prime", jump->hi)
                            .set("W(e,mix(alpha))", jump->flo)
                            .set("W(e,mix(alpha_prime))", jump->fhi)
                            .set("halving_ratio", jump->mean_ratio);
        entry.detail = "jump of " + detail::fmt(jump->last_change) + " along the mixing path persists down to width " +
                       detail::fmt(jump->hi - jump->lo);
        return entry;
      }
    }
  }
  entry.detail = "max halving ratio " + detail::fmt(worst_ratio) + "; no discontinuity detected at alpha resolution " +
                 detail::fmt(1.0 / 8.0 / std::pow(2.0, cfg.halvings));
  return entry;
}

/// |W(e,p) - W(e+a, p shifted by a)|.
inline double common_shift_gap(const BlackBoxCsf& w, double e, const EffortMeasure& p, double a) {
  return std::abs(w(e, p) - w(e + a, right_shift(p, a)));
}

inline AxiomEntry check_invariance_common_shifts(const BlackBoxCsf& w, const SamplerConfig& cfg) {
  auto entry = detail::make_entry(axiom_names::common_shifts, cfg, 6);
  detail::MeasureSampler sampler(cfg, w.k(), 6);
  double worst = 0.0;
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const double e = sampler.effort();
    const double a = sampler.shift();
    const auto p = sampler.measure();
    ++entry.samples;
    const double v0 = w(e, p);
    const double v1 = w(e + a, right_shift(p, a));
    worst = std::max(worst, std::abs(v0 - v1));
    if (std::abs(v0 - v1) > cfg.tolerance) {
      entry.verdict = Verdict::fail;
      entry.witness = Witness{}.set("e", e).set("a", a).set("p", p).set("W(e,p)", v0).set("W(e+a,p+a)", v1);
      entry.detail = "W changes by " + detail::fmt(std::abs(v0 - v1)) + " under a common shift";
      return entry;
    }
  }
  entry.detail = "max common-shift gap " + detail::fmt(worst);
  return entry;
}

/// Solves W(e', p') = target for e' by bisection in log effort on [1e-8, 1e8].
/// The match is relative to min(target, 1 - target): near 0 or 1 an absolute
/// match pins down nothing. Empty when the target is out of range or saturated.
inline std::optional<double> match_effort(const BlackBoxCsf::Evaluator& wq, double target, double rel_tol) {
  const double scale = std::min(target, 1.0 - target);
  if (!(scale > 1e-12)) return std::nullopt;
  double lo = std::log(1e-8);
  double hi = std::log(1e8);
  if (wq(std::exp(lo)) > target || wq(std::exp(hi)) < target) return std::nullopt;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (wq(std::exp(mid)) < target) lo = mid; else hi = mid;
  }
  const double e = std::exp(0.5 * (lo + hi));
  if (std::abs(wq(e) - target) <= rel_tol * scale) return e;
  return std::nullopt;
}

/// |W(e, p+a) - W(e', p'+a)|, meaningful when W(e,p) = W(e',p').
inline double p_shift_gap(const BlackBoxCsf& w, double e, const EffortMeasure& p, double e2, const EffortMeasure& q,
                          double a) {
  return std::abs(w(e, right_shift(p, a)) - w(e2, right_shift(q, a)));
}

/// Equal-value pairs are built by solving W(e', p') = W(e, p) for e'.
inline AxiomEntry check_invariance_p_shifts(const BlackBoxCsf& w, const SamplerConfig& cfg) {
  auto entry = detail::make_entry(axiom_names::p_shifts, cfg, 7);
  detail::MeasureSampler sampler(cfg, w.k(), 7);
  const double match_tol = 1e-9;
  double worst = 0.0;
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const double e = sampler.effort();
    const double a = sampler.shift();
    const auto p = sampler.measure();
    const auto q = sampler.measure();
    ++entry.samples;
    const double target = w(e, p);
    const auto e2 = match_effort(w.bind(q), target, match_tol);
    if (!e2) {
      ++entry.skipped;
      continue;
    }
    const double v0 = w(e, right_shift(p, a));
    const double v1 = w(*e2, right_shift(q, a));
    worst = std::max(worst, std::abs(v0 - v1));
    if (std::abs(v0 - v1) > cfg.tolerance) {
      entry.verdict = Verdict::fail;
      entry.witness = Witness{}
                          .set("e", e)
                          .set("e_prime", *e2)
                          .set("a", a)
                          .set("p", p)
                          .set("p_prime", q)
                          .set("W(e,p)", target)
                          .set("W(e,p+a)", v0)
                          .set("W(e_prime,p_prime+a)", v1);
      entry.detail = "equal win probabilities separate by " + detail::fmt(std::abs(v0 - v1)) + " after a shift";
      return entry;
    }
  }
  entry.detail = "max p-shift gap " + detail::fmt(worst);
  return entry;
}

enum class AxiomSet { characterization, shifts, all };

/// Runs the selected checks; entries are ordered by a fixed axiom order.
inline AxiomReport certify(const BlackBoxCsf& w, const SamplerConfig& cfg, AxiomSet set = AxiomSet::all) {
  AxiomReport report;
  report.csf = w.name();
  report.k = w.k();
  report.seed = cfg.seed;
  if (set != AxiomSet::shifts) {
    report.entries.push_back(check_market_clearing(w, cfg));
    report.entries.push_back(check_e_continuity(w, cfg));
    report.entries.push_back(check_p_continuity(w, cfg));
    report.entries.push_back(check_monotonicity(w, cfg));
    report.entries.push_back(check_competitiveness(w, cfg));
    report.entries.push_back(check_comonotonicity(w, cfg));
  }
  if (set != AxiomSet::characterization) {
    report.entries.push_back(check_invariance_common_shifts(w, cfg));
    report.entries.push_back(check_invariance_p_shifts(w, cfg));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Audit of tabulated (effort, measure id) -> win rate data.

struct TabulatedCsf {
  struct Row {
    double effort;
    std::string measure_id;
    double win_rate;
  };

  double k = 0.0;
  std::map<std::string, EffortMeasure> measures;
  std::vector<Row> rows;

  std::optional<double> lookup(const std::string& id, double e) const {
    for (const auto& r : rows)
      if (r.measure_id == id && std::abs(r.effort - e) <= 1e-12 * std::max(1.0, e)) return r.win_rate;
    return std::nullopt;
  }
};

/// Finite data can refute but not certify limits or continuity: those axioms
/// come back inapplicable. Point estimates are taken at face value.
inline AxiomReport audit_tabulated(const TabulatedCsf& data, double tol) {
  AxiomReport report;
  report.csf = "tabulated data";
  report.k = data.k;
  auto entry_for = [tol](const char* name) {
    AxiomEntry e;
    e.axiom = name;
    e.tolerance = tol;
    return e;
  };

  {
    auto entry = entry_for(axiom_names::market_clearing);
    for (const auto& [id, p] : data.measures) {
      if (!p.is_atomic()) {
        ++entry.skipped;
        continue;
      }
      double integral = 0.0;
      bool complete = true;
      for (const auto& a : p.atoms()) {
        const auto v = data.lookup(id, a.effort);
        if (!v) {
          complete = false;
          break;
        }
        integral += a.mass * *v;
      }
      if (!complete) {
        ++entry.skipped;
        continue;
      }
      ++entry.samples;
      if (std::abs(integral - data.k) > tol && entry.verdict != Verdict::fail) {
        entry.verdict = Verdict::fail;
        entry.witness = Witness{}.set("p", p).set("integral", integral).set("k", data.k);
        entry.detail = "measure " + id + " integrates W to " + detail::fmt(integral);
      }
    }
    if (entry.samples == 0) {
      entry.verdict = Verdict::inapplicable;
      entry.detail = "no measure has win rates at all of its atoms";
    }
    report.entries.push_back(std::move(entry));
  }

  auto rows_of = [&](const std::string& id) {
    std::vector<std::pair<double, double>> out;
    for (const auto& r : data.rows)
      if (r.measure_id == id) out.emplace_back(r.effort, r.win_rate);
    std::sort(out.begin(), out.end());
    return out;
  };

  for (const char* name : {axiom_names::e_continuity, axiom_names::p_continuity, axiom_names::competitiveness,
                           axiom_names::p_shifts}) {
    auto entry = entry_for(name);
    entry.verdict = Verdict::inapplicable;
    entry.detail = "requires limits, continuity or equal-value pairs that a finite table cannot supply";
    report.entries.push_back(std::move(entry));
  }

  {
    auto entry = entry_for(axiom_names::monotonicity);
    for (const auto& [id, p] : data.measures) {
      const auto rs = rows_of(id);
      for (std::size_t i = 0; i + 1 < rs.size(); ++i) {
        ++entry.samples;
        if (rs[i].first < rs[i + 1].first && rs[i].second - rs[i + 1].second > tol && entry.verdict != Verdict::fail) {
          entry.verdict = Verdict::fail;
          entry.witness = Witness{}
                              .set("e", rs[i].first)
                              .set("e_prime", rs[i + 1].first)
                              .set("p", p)
                              .set("W(e,p)", rs[i].second)
                              .set("W(e_prime,p)", rs[i + 1].second);
          entry.detail = "win rate falls with effort against measure " + id;
        }
      }
    }
    if (entry.verdict == Verdict::pass) entry.detail = "no decrease in tabulated efforts; limit not assessable";
    report.entries.push_back(std::move(entry));
  }

  {
    auto entry = entry_for(axiom_names::co_monotonicity);
    for (auto it = data.measures.begin(); it != data.measures.end(); ++it) {
      for (auto jt = std::next(it); jt != data.measures.end(); ++jt) {
        std::vector<std::tuple<double, double, double>> common;
        for (const auto& [e, v] : rows_of(it->first))
          if (auto u = data.lookup(jt->first, e)) common.emplace_back(e, v, *u);
        ++entry.samples;
        const std::tuple<double, double, double>* above = nullptr;
        const std::tuple<double, double, double>* below = nullptr;
        for (const auto& c : common) {
          if (std::get<1>(c) > std::get<2>(c) + tol && !above) above = &c;
          if (std::get<1>(c) < std::get<2>(c) - tol && !below) below = &c;
        }
        if (above && below && entry.verdict != Verdict::fail) {
          entry.verdict = Verdict::fail;
          entry.witness = Witness{}
                              .set("e", std::get<0>(*above))
                              .set("e_prime", std::get<0>(*below))
                              .set("p", it->second)
                              .set("p_prime", jt->second)
                              .set("W(e,p)", std::get<1>(*above))
                              .set("W(e,p_prime)", std::get<2>(*above))
                              .set("W(e_prime,p)", std::get<1>(*below))
                              .set("W(e_prime,p_prime)", std::get<2>(*below));
          entry.detail = "measures " + it->first + " and " + jt->first + " rank differently across efforts";
        }
      }
    }
    report.entries.push_back(std::move(entry));
  }

  {
    auto entry = entry_for(axiom_names::common_shifts);
    for (const auto& [id1, p1] : data.measures) {
      for (const auto& [id2, p2] : data.measures) {
        if (id1 == id2 || !p1.is_atomic() || !p2.is_atomic() || p1.atoms().size() != p2.atoms().size()) continue;
        const double a = p2.atoms().front().effort - p1.atoms().front().effort;
        if (!(a > 0.0)) continue;
        bool shifted = true;
        for (std::size_t i = 0; i < p1.atoms().size(); ++i) {
          const auto& x = p1.atoms()[i];
          const auto& y = p2.atoms()[i];
          if (std::abs(x.effort + a - y.effort) > 1e-9 * std::max(1.0, y.effort) || std::abs(x.mass - y.mass) > 1e-12)
            shifted = false;
        }
        if (!shifted) continue;
        for (const auto& [e, v] : rows_of(id1)) {
          const auto u = data.lookup(id2, e + a);
          if (!u) continue;
          ++entry.samples;
          if (std::abs(v - *u) > tol && entry.verdict != Verdict::fail) {
            entry.verdict = Verdict::fail;
            entry.witness = Witness{}.set("e", e).set("a", a).set("p", p1).set("W(e,p)", v).set("W(e+a,p+a)", *u);
            entry.detail = "measure " + id2 + " is " + id1 + " shifted, but win rates differ";
          }
        }
      }
    }
    if (entry.samples == 0) {
      entry.verdict = Verdict::inapplicable;
      entry.detail = "no pair of tabulated measures related by a right shift";
    }
    report.entries.push_back(std::move(entry));
  }
  const std::vector<std::string> order = {axiom_names::market_clearing, axiom_names::e_continuity,
                                          axiom_names::p_continuity,    axiom_names::monotonicity,
                                          axiom_names::competitiveness, axiom_names::co_monotonicity,
                                          axiom_names::common_shifts,   axiom_names::p_shifts};
  auto pos = [&](const AxiomEntry& e) { return std::find(order.begin(), order.end(), e.axiom) - order.begin(); };
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [&](const AxiomEntry& a, const AxiomEntry& b) { return pos(a) < pos(b); });
  return report;
}

}  // namespace rpf
