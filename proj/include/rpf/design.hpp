#pragma once

// Prize design with a fixed purse B split among a mass k of winners (V = B/k):
// equilibrium effort as a function of k, the hazard-ratio curve that drives
// the optimal k, and rent dissipation under quadratic costs.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rpf/distributions.hpp"
#include "rpf/equilibrium.hpp"
#include "rpf/errors.hpp"
#include "rpf/numeric.hpp"
#include "rpf/verdict.hpp"

namespace rpf {

/// 512 log-spaced budget fractions on [0.005, 0.995].
inline std::vector<double> default_k_grid() { return numeric::logspace(0.005, 0.995, 512); }

inline void require_k_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("k grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] < 1.0)) throw DomainError("k grid must lie strictly inside (0, 1)");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("k grid must be strictly increasing");
  }
}

struct DesignSpec {
  double B = 1.0;
  NoiseDistribution noise = NoiseDistribution::normal();
  Utility utility = Utility::linear();
  CostFunction cost = CostFunction::quadratic();
  std::vector<double> k_grid = default_k_grid();

  ContestSpec contest(double k) const {
    if (!(B > 0.0) || !std::isfinite(B)) throw DomainError("purse B must be positive");
    return ContestSpec::from_purse(k, B, cost, utility, noise);
  }
};

struct CurvePoint {
  double k;
  double value;
};

/// e*(k) solving the first-order condition with V = B/k.
inline double equilibrium_effort(const DesignSpec& spec, double k) { return foc_equilibrium(spec.contest(k)).e_star; }

inline std::vector<CurvePoint> effort_curve(const DesignSpec& spec) {
  require_k_grid(spec.k_grid);
  std::vector<CurvePoint> out;
  out.reserve(spec.k_grid.size());
  for (double k : spec.k_grid) out.push_back({k, equilibrium_effort(spec, k)});
  return out;
}

struct CurveArgmax {
  double k;
  double value;
  bool boundary;  ///< the grid maximum sits at an endpoint; no interior optimum found
};

/// Grid argmax, refined by golden section over the neighbouring grid cells.
template <class F>
CurveArgmax argmax_over_grid(F&& f, const std::vector<double>& grid) {
  require_k_grid(grid);
  std::size_t best = 0;
  double best_val = f(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best == 0 || best + 1 == grid.size()) return {grid[best], best_val, true};
  const double k = numeric::golden_section_max(f, grid[best - 1], grid[best + 1], 1e-13);
  const double v = f(k);
  if (v >= best_val) return {k, v, false};
  return {grid[best], best_val, false};
}

inline CurveArgmax optimal_k(const DesignSpec& spec) {
  return argmax_over_grid([&](double k) { return equilibrium_effort(spec, k); }, spec.k_grid);
}

/// f(s) / (1 - F(s)).
inline double hazard_ratio(const NoiseDistribution& F, double s) { return F.pdf(s) / F.sf(s); }

/// (1/k) f(F^-1(1 - k)); equals the hazard ratio at s = F^-1(1 - k).
inline double figure1_value(const NoiseDistribution& F, double k) {
  require_budget(k);
  return F.pdf(F.quantile(1.0 - k)) / k;
}

inline std::vector<CurvePoint> figure1_curve(const NoiseDistribution& F, const std::vector<double>& k_grid) {
  require_k_grid(k_grid);
  std::vector<CurvePoint> out;
  out.reserve(k_grid.size());
  for (double k : k_grid) out.push_back({k, figure1_value(F, k)});
  return out;
}

inline CurveArgmax figure1_argmax(const NoiseDistribution& F, const std::vector<double>& k_grid) {
  return argmax_over_grid([&](double k) { return figure1_value(F, k); }, k_grid);
}

struct Proposition5Result {
  Verdict verdict;
  std::string detail;
  double max_s_fprime;                ///< max of s f'(s) over the sampled s
  std::optional<double> violating_k;  ///< first k where e*(k) increased
};

/// e*(k) non-increasing on a grid inside [0.5, 1), given F symmetric with
/// s f'(s) <= 0. The hypothesis is sampled on [-10, 10] robust-scale units;
/// a violation beyond 1e-9 makes the check inapplicable.
inline Proposition5Result proposition5_check(const DesignSpec& spec) {
  require_k_grid(spec.k_grid);
  if (spec.k_grid.front() < 0.5) throw DomainError("decreasing-effort check needs a grid in [0.5, 1)");
  const auto& F = spec.noise;
  if (!F.symmetric()) return {Verdict::inapplicable, "noise distribution is not symmetric", 0.0, std::nullopt};
  if (!F.has_density()) return {Verdict::inapplicable, "noise distribution has no density", 0.0, std::nullopt};
  const double scale = F.robust_scale();
  double max_sf = -std::numeric_limits<double>::infinity();
  for (double s : numeric::linspace(-10.0 * scale, 10.0 * scale, 2001)) max_sf = std::max(max_sf, s * F.pdf_derivative(s));
  if (max_sf > 1e-9) return {Verdict::inapplicable, "s f'(s) > 0 somewhere: density is not unimodal at 0", max_sf, std::nullopt};

  const auto curve = effort_curve(spec);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].value > curve[i - 1].value) {
      return {Verdict::fail, "e*(k) increases between grid points", max_sf, curve[i].k};
    }
  }
  return {Verdict::pass, "e*(k) non-increasing on the grid", max_sf, std::nullopt};
}

/// Risk-neutral default: linear utility, c = e^2, B = 1.
inline Proposition5Result proposition5_check(const NoiseDistribution& F, const std::vector<double>& k_grid) {
  DesignSpec spec;
  spec.noise = F;
  spec.k_grid = k_grid;
  return proposition5_check(spec);
}

/// Total equilibrium cost over total rents, c = A e^2 and u(V) = V:
/// V / (4 A k) f(F^-1(1 - k))^2.
inline double rent_dissipation_ratio(double V, double A, double k, const NoiseDistribution& F) {
  require_budget(k);
  if (!(V > 0.0) || !(A > 0.0)) throw DomainError("V and A must be positive");
  const double f = F.pdf(F.quantile(1.0 - k));
  return V / (4.0 * A * k) * f * f;
}

/// Same ratio computed as c(e*) / (k V) with e* from the first-order condition.
inline double rent_dissipation_via_equilibrium(double V, double A, double k, const NoiseDistribution& F) {
  const ContestSpec spec(k, V, CostFunction::quadratic(A), Utility::linear(), F);
  return spec.cost.value(foc_equilibrium(spec).e_star) / (k * V);
}

/// Prize at which the dissipation ratio equals one: 4 A k / f(F^-1(1 - k))^2.
inline double dissipation_threshold(double A, double k, const NoiseDistribution& F) {
  require_budget(k);
  if (!(A > 0.0)) throw DomainError("A must be positive");
  const double f = F.pdf(F.quantile(1.0 - k));
  return 4.0 * A * k / (f * f);
}

}  // namespace rpf
