#pragma once

// Small one-dimensional numerical kernels shared by the solvers: grids,
// monotone root bracketing/bisection and golden-section maximisation.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "rpf/errors.hpp"

namespace rpf::numeric {

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

/// n points geometrically spaced on [lo, hi]; requires 0 < lo < hi.
inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo)) throw DomainError("logspace requires 0 < lo <= hi");
  auto exps = linspace(std::log(lo), std::log(hi), n);
  for (auto& x : exps) x = std::exp(x);
  if (n > 0) {
    exps.front() = lo;
    exps.back() = hi;
  }
  return exps;
}

struct Bracket {
  double lo;
  double hi;
  int expansions;
};

/// Expands [x0 - step, x0 + step] geometrically until `f` (decreasing) is
/// positive at lo and negative at hi. Throws NumericError after max_doublings.
template <class F>
Bracket bracket_decreasing(F&& f, double x0, double step = 1.0, int max_doublings = 200) {
  double lo = x0 - step;
  double hi = x0 + step;
  double width = step;
  for (int i = 0; i <= max_doublings; ++i) {
    const bool lo_ok = f(lo) > 0.0;
    const bool hi_ok = f(hi) < 0.0;
    if (lo_ok && hi_ok) return {lo, hi, i};
    width *= 2.0;
    if (!lo_ok) lo = x0 - width;
    if (!hi_ok) hi = x0 + width;
  }
  throw NumericError("bracket expansion failed after " + std::to_string(max_doublings) + " doublings");
}

struct BisectionResult {
  double lo;
  double hi;
  int iterations;
};

/// Bisects a sign change of a decreasing function (f(lo) > 0 > f(hi)) until the
/// bracket is narrower than `width` or cannot be split further in double precision.
template <class F>
BisectionResult bisect_decreasing(F&& f, double lo, double hi, double width, int max_iter = 400) {
  int it = 0;
  while (hi - lo > width && it < max_iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    ++it;
    const double v = f(mid);
    if (v > 0.0) {
      lo = mid;
    } else if (v < 0.0) {
      hi = mid;
    } else {
      return {mid, mid, it};
    }
  }
  return {lo, hi, it};
}

/// Golden-section search for the maximum of a unimodal function on [a, b].
template <class F>
double golden_section_max(F&& f, double a, double b, double xtol, int max_iter = 300) {
  constexpr double inv_phi = 0.6180339887498948482;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > xtol; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

/// splitmix64 step; used to derive independent seeds for RNG streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Maps 64 random bits to a double strictly inside (0, 1). Portable across
/// standard libraries, unlike std::uniform_real_distribution.
inline double open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace rpf::numeric
