#pragma once

// Symmetric equilibrium of the contest game under additive RPFs: agents pick
// e to maximize W(e, p) u(V) - c(e), and p = delta_{e*} is an equilibrium when
// e* is a best response to itself.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rpf/distributions.hpp"
#include "rpf/engine.hpp"
#include "rpf/errors.hpp"
#include "rpf/measures.hpp"
#include "rpf/numeric.hpp"

namespace rpf {

/// Efforts below this are treated as staying out of the contest.
inline constexpr double kParticipationFloor = 1e-12;

class CostFunction {
 public:
  using Fn = std::function<double(double)>;

  /// c(e) = A e^beta, A > 0, beta > 1.
  static CostFunction power(double A, double beta) {
    if (!(A > 0.0) || !std::isfinite(A)) throw DomainError("cost scale A must be positive");
    if (!(beta > 1.0) || !std::isfinite(beta)) throw DomainError("cost exponent beta must exceed 1");
    CostFunction c;
    c.A_ = A;
    c.beta_ = beta;
    return c;
  }

  static CostFunction quadratic(double A = 1.0) { return power(A, 2.0); }

  /// c, c', c'' supplied by the caller; the standard conditions are sampled.
  static CostFunction custom(Fn c, Fn c1, Fn c2, std::string name = "custom") {
    if (!c || !c1 || !c2) throw DomainError("custom cost needs c, c' and c''");
    CostFunction out;
    out.c_ = std::move(c);
    out.c1_ = std::move(c1);
    out.c2_ = std::move(c2);
    out.name_ = std::move(name);
    out.check_custom();
    return out;
  }

  bool is_power() const { return !c_; }
  double A() const { return A_; }
  double beta() const { return beta_; }

  std::string description() const {
    if (!is_power()) return name_;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g*e^%.17g", A_, beta_);
    return buf;
  }

  double value(double e) const { return is_power() ? A_ * std::pow(e, beta_) : c_(e); }
  double marginal(double e) const { return is_power() ? A_ * beta_ * std::pow(e, beta_ - 1.0) : c1_(e); }
  double curvature(double e) const {
    return is_power() ? A_ * beta_ * (beta_ - 1.0) * std::pow(e, beta_ - 2.0) : c2_(e);
  }

  /// Solves c'(e) = y for y > 0.
  double inverse_marginal(double y) const {
    if (!(y > 0.0)) throw DomainError("inverse marginal cost needs a positive target");
    if (is_power()) return std::pow(y / (A_ * beta_), 1.0 / (beta_ - 1.0));
    double hi = 1.0;
    int doublings = 0;
    while (c1_(hi) < y) {
      hi *= 2.0;
      if (++doublings > 2000) throw NumericError("marginal cost never reaches target");
    }
    double lo = 0.0;
    for (int i = 0; i < 2000 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (c1_(mid) < y) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  CostFunction() = default;

  void check_custom() const {
    for (double e : numeric::logspace(1e-6, 1e3, 91)) {
      if (!(c1_(e) > 0.0)) throw DomainError("custom cost: c' must be positive");
      if (!(c2_(e) > 0.0)) throw DomainError("custom cost: c'' must be positive");
    }
    if (std::abs(c_(1e-12)) > 1e-6 || std::abs(c1_(1e-12)) > 1e-6)
      throw DomainError("custom cost: c and c' must vanish at 0");
  }

  double A_ = 1.0;
  double beta_ = 2.0;
  Fn c_, c1_, c2_;
  std::string name_;
};

class Utility {
 public:
  static Utility linear() { return Utility(1.0); }

  /// u(V) = V^rho, rho in (0, 1].
  static Utility power(double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("utility exponent rho must lie in (0, 1]");
    return Utility(rho);
  }

  bool is_linear() const { return rho_ == 1.0; }
  double rho() const { return rho_; }
  double operator()(double v) const { return is_linear() ? v : std::pow(v, rho_); }

  std::string description() const {
    if (is_linear()) return "linear";
    char buf[48];
    std::snprintf(buf, sizeof buf, "V^%.17g", rho_);
    return buf;
  }

 private:
  explicit Utility(double rho) : rho_(rho) {}
  double rho_;
};

struct ContestSpec {
  double k;
  double V;
  CostFunction cost;
  Utility utility;
  NoiseDistribution noise;

  ContestSpec(double k, double V, CostFunction cost, Utility utility, NoiseDistribution noise)
      : k(k), V(V), cost(std::move(cost)), utility(utility), noise(std::move(noise)) {
    require_budget(k);
    if (!(V > 0.0) || !std::isfinite(V)) throw DomainError("prize V must be positive");
  }

  /// Purse B split among a mass k of winners: V = B / k.
  static ContestSpec from_purse(double k, double B, CostFunction cost, Utility utility, NoiseDistribution noise) {
    require_budget(k);
    return ContestSpec(k, B / k, std::move(cost), utility, std::move(noise));
  }

  PerformanceFamily family() const { return PerformanceFamily::additive(noise); }
  double prize_utility() const { return utility(V); }
};

/// U(e, p) = W(e, p) u(V) - c(e).
inline double payoff(const ContestSpec& spec, double e, const EffortMeasure& p) {
  return csf_eval(spec.family(), p, spec.k, e) * spec.prize_utility() - spec.cost.value(e);
}

struct FocResult {
  double e_star;
  double residual;  ///< c'(e*) - rhs
  double rhs;       ///< f(F^-1(1 - k)) u(V)
};

/// Symmetric first-order condition c'(e*) = f(F^-1(1 - k)) u(V).
inline FocResult foc_equilibrium(const ContestSpec& spec) {
  const double rhs = spec.noise.pdf(spec.noise.quantile(1.0 - spec.k)) * spec.prize_utility();
  const double e = spec.cost.inverse_marginal(rhs);
  return {e, spec.cost.marginal(e) - rhs, rhs};
}

struct SocGrid {
  double e_lo = 1e-6;
  double e_hi = 0.0;  ///< 0 picks max(10, 10 e*)
  std::size_t e_points = 400;
  double s_half_width = 20.0;  ///< in robust-scale units around the median
  std::size_t s_points = 4001;
};

struct SocResult {
  bool pass;
  double margin;  ///< min over the grids of c''(e) + f'(s) u(V)
  double e_at;
  double s_at;
};

/// Samples c''(e) > -f'(s) u(V). The condition separates, so the worst margin
/// is min c'' plus u(V) min f'.
inline SocResult soc_check(const ContestSpec& spec, const SocGrid& grid = {}) {
  double e_hi = grid.e_hi;
  if (!(e_hi > 0.0)) e_hi = std::max(10.0, 10.0 * foc_equilibrium(spec).e_star);
  double min_c2 = std::numeric_limits<double>::infinity();
  double e_at = grid.e_lo;
  for (double e : numeric::logspace(grid.e_lo, e_hi, grid.e_points)) {
    const double v = spec.cost.curvature(e);
    if (v < min_c2) {
      min_c2 = v;
      e_at = e;
    }
  }
  const double center = spec.noise.median();
  const double width = grid.s_half_width * spec.noise.robust_scale();
  double min_f1 = std::numeric_limits<double>::infinity();
  double s_at = center;
  for (double s : numeric::linspace(center - width, center + width, grid.s_points)) {
    const double v = spec.noise.pdf_derivative(s);
    if (v < min_f1) {
      min_f1 = v;
      s_at = s;
    }
  }
  const double margin = min_c2 + min_f1 * spec.prize_utility();
  return {margin > 0.0, margin, e_at, s_at};
}

struct BestResponse {
  double e;
  double payoff;
  bool boundary;  ///< maximizer at the participation floor (agent stays out)
};

/// Global maximizer of U(., p): 10^3-point log grid up to where c(e) > u(V),
/// then golden-section refinement around the best grid point.
inline BestResponse best_response(const ContestSpec& spec, const EffortMeasure& p) {
  const double u = spec.prize_utility();
  if (p.total_mass() <= spec.k) {
    const double e = kParticipationFloor;
    return {e, u - spec.cost.value(e), true};
  }
  const auto fam = spec.family();
  const BoundCsf w(fam, p, spec.k);
  auto U = [&](double e) { return w(e) * u - spec.cost.value(e); };

  double e_hi = 1.0;
  for (int i = 0; spec.cost.value(e_hi) <= u; ++i) {
    if (i > 2000) throw NumericError("cost never exceeds prize utility");
    e_hi *= 2.0;
  }
  const double e_lo = std::max(kParticipationFloor, e_hi * 1e-9);
  const auto grid = numeric::logspace(e_lo, e_hi, 1000);
  std::size_t best = 0;
  double best_val = U(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = U(grid[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best == 0) return {grid[0], best_val, true};
  const double a = grid[best - 1];
  const double b = grid[std::min(best + 1, grid.size() - 1)];
  const double e = numeric::golden_section_max(U, a, b, 1e-12 * b);
  const double v = U(e);
  if (v >= best_val) return {e, v, false};
  return {grid[best], best_val, false};
}

struct EquilibriumVerdict {
  bool verified;
  double best_response;
  double gap;     ///< |best_response - e*|
  double payoff;  ///< U(e*, delta_{e*})
};

inline EquilibriumVerdict verify_equilibrium(const ContestSpec& spec, double e_star, double tol = 1e-4) {
  const auto p = dirac(e_star);
  const auto br = best_response(spec, p);
  const double gap = std::abs(br.e - e_star);
  const double u = payoff(spec, e_star, p);
  return {gap <= tol && u >= 0.0, br.e, gap, u};
}

/// Everything the CLI reports for one spec: the FOC point, the second-order
/// margin and the grid best response to delta_{e*}, which can differ when SOC fails.
struct EquilibriumReport {
  FocResult foc;
  SocResult soc;
  EquilibriumVerdict verdict;
};

inline EquilibriumReport solve_equilibrium(const ContestSpec& spec) {
  const auto foc = foc_equilibrium(spec);
  return {foc, soc_check(spec), verify_equilibrium(spec, foc.e_star)};
}

}  // namespace rpf
