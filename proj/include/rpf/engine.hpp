#pragma once

// Random performance functions: families {F_e}, the market-clearing cutoff
// s(p), and the contest success function W(e, p) = 1 - F_e(s(p)).

#include <cmath>
#include <concepts>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rpf/distributions.hpp"
#include "rpf/errors.hpp"
#include "rpf/measures.hpp"
#include "rpf/numeric.hpp"

namespace rpf {

/// A family of performance cdfs indexed by effort. `survival(e, x)` is
/// 1 - F_e(x); `location(e)` seeds the cutoff search; `quantile(e, u)`
/// supports inverse-transform sampling.
template <class F>
concept PerformanceFamilyLike = requires(const F& f, double e, double x) {
  { f.survival(e, x) } -> std::convertible_to<double>;
  { f.location(e) } -> std::convertible_to<double>;
  { f.quantile(e, x) } -> std::convertible_to<double>;
};

/// F_e(x) = F(x - g(e)). The additive family uses g(e) = e; warped families
/// take any continuous, strictly increasing g that is unbounded above.
class PerformanceFamily {
 public:
  using Warp = std::function<double(double)>;

  static PerformanceFamily additive(NoiseDistribution noise) {
    return PerformanceFamily(std::move(noise), nullptr, "identity");
  }

  static PerformanceFamily warped(NoiseDistribution noise, Warp g, std::string warp_name) {
    if (!g) throw DomainError("warped family needs a location map");
    return PerformanceFamily(std::move(noise), std::move(g), std::move(warp_name));
  }

  bool is_additive() const { return !warp_; }
  const NoiseDistribution& noise() const { return noise_; }
  const std::string& warp_name() const { return warp_name_; }

  std::string description() const {
    if (is_additive()) return "additive RPF, noise " + noise_.description();
    return "warped RPF, g=" + warp_name_ + ", noise " + noise_.description();
  }

  double location(double e) const { return warp_ ? warp_(e) : e; }
  double cdf(double e, double x) const { return noise_.cdf(x - location(e)); }
  double survival(double e, double x) const { return noise_.sf(x - location(e)); }
  double quantile(double e, double u) const { return location(e) + noise_.quantile(u); }

 private:
  PerformanceFamily(NoiseDistribution noise, Warp g, std::string name)
      : noise_(std::move(noise)), warp_(std::move(g)), warp_name_(std::move(name)) {
    if (!warp_) warp_name_ = "identity";
  }

  NoiseDistribution noise_;
  Warp warp_;
  std::string warp_name_;
};

struct CutoffResult {
  double s;
  double residual;
  int iterations;
};

struct CutoffOptions {
  double width = 1e-12;
  int max_doublings = 200;
};

inline void require_budget(double k) {
  if (!(k > 0.0 && k < 1.0)) throw DomainError("budget fraction k must lie in (0, 1)");
}

inline void require_binding(const EffortMeasure& p, double k) {
  if (!(p.total_mass() > k)) throw BudgetNotBinding("budget not binding: p(E) <= k");
}

/// Integral of 1 - F_e(s) over p, minus k. Strictly decreasing in s.
template <PerformanceFamilyLike Family>
double clearing_residual(const Family& fam, const EffortMeasure& p, double s, double k) {
  require_budget(k);
  require_binding(p, k);
  return p.integrate([&](double e) { return fam.survival(e, s); }) - k;
}

/// Unique root of the clearing residual: bracket expansion from the location
/// of the mean effort, bisection to `width`, then one secant polish.
template <PerformanceFamilyLike Family>
CutoffResult solve_cutoff(const Family& fam, const EffortMeasure& p, double k, const CutoffOptions& opt = {}) {
  require_budget(k);
  require_binding(p, k);
  auto residual = [&](double s) { return p.integrate([&](double e) { return fam.survival(e, s); }) - k; };
  const double s0 = fam.location(p.mean_effort());
  if (!std::isfinite(s0)) throw NumericError("non-finite starting cutoff");
  const auto br = numeric::bracket_decreasing(residual, s0, std::max(1.0, 1e-6 * std::abs(s0)), opt.max_doublings);
  const double width = opt.width * std::max(1.0, std::abs(s0));
  const auto bis = numeric::bisect_decreasing(residual, br.lo, br.hi, width);
  double s = 0.5 * (bis.lo + bis.hi);
  double r = residual(s);
  int iterations = br.expansions + bis.iterations + 1;
  if (bis.hi > bis.lo) {
    const double rlo = residual(bis.lo);
    const double rhi = residual(bis.hi);
    iterations += 2;
    if (rlo != rhi) {
      const double secant = bis.lo - rlo * (bis.hi - bis.lo) / (rhi - rlo);
      if (secant > bis.lo && secant < bis.hi) {
        const double rs = residual(secant);
        ++iterations;
        if (std::abs(rs) < std::abs(r)) {
          s = secant;
          r = rs;
        }
      }
    }
  }
  return {s, r, iterations};
}

/// W(e, p) = 1 - F_e(s(p)); equals 1 when p(E) <= k (every effort wins).
template <PerformanceFamilyLike Family>
double csf_eval(const Family& fam, const EffortMeasure& p, double k, double e) {
  if (!(e > 0.0)) throw DomainError("effort must be positive");
  require_budget(k);
  if (!(p.total_mass() > k)) return 1.0;
  return fam.survival(e, solve_cutoff(fam, p, k).s);
}

/// W(., p) with the cutoff solved once; cheap to call for many efforts.
template <PerformanceFamilyLike Family>
class BoundCsf {
 public:
  BoundCsf(Family fam, const EffortMeasure& p, double k) : fam_(std::move(fam)) {
    require_budget(k);
    if (p.total_mass() > k) cutoff_ = solve_cutoff(fam_, p, k);
  }

  bool binding() const { return cutoff_.has_value(); }
  const std::optional<CutoffResult>& cutoff() const { return cutoff_; }

  double operator()(double e) const {
    if (!(e > 0.0)) throw DomainError("effort must be positive");
    return cutoff_ ? fam_.survival(e, cutoff_->s) : 1.0;
  }

 private:
  Family fam_;
  std::optional<CutoffResult> cutoff_;
};

/// t = F1^-1(1-k) - F2^-1(1-k). If F2 = shift(F1, t0), returns t0. The
/// caller must confirm both cdfs represent the same W; this does not.
inline double recover_translation(const NoiseDistribution& f1, const NoiseDistribution& f2, double k) {
  require_budget(k);
  return f1.quantile(1.0 - k) - f2.quantile(1.0 - k);
}

/// Samples the location map on a log grid. Throws DomainError when g is not
/// strictly increasing there; returns warnings when growth looks bounded.
inline std::vector<std::string> validate_family(const PerformanceFamily& fam) {
  std::vector<std::string> warnings;
  if (fam.is_additive()) return warnings;
  const auto grid = numeric::logspace(1e-6, 1e12, 181);
  double prev = fam.location(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = fam.location(grid[i]);
    if (!std::isfinite(v)) throw DomainError("location map is not finite at e=" + std::to_string(grid[i]));
    if (!(v > prev)) throw DomainError("location map is not strictly increasing near e=" + std::to_string(grid[i]));
    prev = v;
  }
  const double g_mid = fam.location(1e6);
  const double g_top = fam.location(1e12);
  const double scale = fam.noise().robust_scale();
  if (g_top - g_mid < 1e-3 * scale) {
    warnings.push_back("location map " + fam.warp_name() +
                       " grows by less than 1e-3 noise scales over [1e6, 1e12]; unboundedness not confirmed");
  }
  return warnings;
}

}  // namespace rpf
