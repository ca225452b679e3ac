#pragma once

// Effort distributions: finite measures on E = (0, inf) made of point masses
// plus gridded densities integrated by the trapezoid rule.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "rpf/errors.hpp"
#include "rpf/numeric.hpp"

namespace rpf {

struct Atom {
  double effort;
  double mass;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Nonnegative density weights on a strictly increasing positive grid.
struct DensitySegment {
  std::vector<double> grid;
  std::vector<double> weights;

  double mass() const {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
      total += 0.5 * (grid[i + 1] - grid[i]) * (weights[i] + weights[i + 1]);
    return total;
  }

  friend bool operator==(const DensitySegment&, const DensitySegment&) = default;
};

inline constexpr std::size_t kDefaultGridPoints = 4096;

class EffortMeasure {
 public:
  /// Atoms at equal efforts are merged; zero-mass atoms are dropped.
  explicit EffortMeasure(std::vector<Atom> atoms, std::vector<DensitySegment> segments = {})
      : atoms_(std::move(atoms)), segments_(std::move(segments)) {
    for (const auto& a : atoms_) {
      if (!(a.effort > 0.0) || !std::isfinite(a.effort)) throw DomainError("atom effort must be a positive finite number");
      if (!(a.mass >= 0.0) || !std::isfinite(a.mass)) throw DomainError("atom mass must be nonnegative");
    }
    std::erase_if(atoms_, [](const Atom& a) { return a.mass == 0.0; });
    std::sort(atoms_.begin(), atoms_.end(), [](const Atom& x, const Atom& y) { return x.effort < y.effort; });
    std::vector<Atom> merged;
    merged.reserve(atoms_.size());
    for (const auto& a : atoms_) {
      if (!merged.empty() && merged.back().effort == a.effort) {
        merged.back().mass += a.mass;
      } else {
        merged.push_back(a);
      }
    }
    atoms_ = std::move(merged);

    for (const auto& seg : segments_) {
      if (seg.grid.size() < 2 || seg.grid.size() != seg.weights.size())
        throw DomainError("density segment needs matching grid and weights of length >= 2");
      for (std::size_t i = 0; i < seg.grid.size(); ++i) {
        if (!(seg.grid[i] > 0.0) || !std::isfinite(seg.grid[i])) throw DomainError("segment grid must lie in (0, inf)");
        if (i > 0 && !(seg.grid[i] > seg.grid[i - 1])) throw DomainError("segment grid must be strictly increasing");
        if (!(seg.weights[i] >= 0.0) || !std::isfinite(seg.weights[i])) throw DomainError("segment weights must be nonnegative");
      }
    }
    std::erase_if(segments_, [](const DensitySegment& s) { return s.mass() == 0.0; });

    const double m = total_mass();
    if (!(m > 0.0)) throw DomainError("effort measure must have positive mass");
    if (m > 1.0 + 1e-12) throw DomainError("effort measure mass exceeds one");
  }

  static EffortMeasure dirac(double effort, double mass = 1.0) {
    if (!(effort > 0.0)) throw DomainError("dirac effort must be positive");
    return EffortMeasure({Atom{effort, mass}});
  }

  /// Uniform density of the given total mass on [lo, hi], 0 < lo < hi.
  static EffortMeasure uniform(double lo, double hi, double mass, std::size_t points = kDefaultGridPoints) {
    if (!(lo > 0.0) || !(hi > lo)) throw DomainError("uniform density needs 0 < lo < hi");
    DensitySegment seg{numeric::linspace(lo, hi, points), std::vector<double>(points, mass / (hi - lo))};
    return EffortMeasure({}, {std::move(seg)});
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<DensitySegment>& segments() const { return segments_; }
  bool is_atomic() const { return segments_.empty(); }

  double total_mass() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.mass;
    for (const auto& s : segments_) m += s.mass();
    return m;
  }

  /// Sum of m_i g(e_i) over atoms plus trapezoid sums over density segments.
  template <class G>
  double integrate(G&& g) const {
    double total = 0.0;
    for (const auto& a : atoms_) total += a.mass * g(a.effort);
    for (const auto& s : segments_) {
      double prev = s.weights[0] * g(s.grid[0]);
      for (std::size_t i = 0; i + 1 < s.grid.size(); ++i) {
        const double next = s.weights[i + 1] * g(s.grid[i + 1]);
        total += 0.5 * (s.grid[i + 1] - s.grid[i]) * (prev + next);
        prev = next;
      }
    }
    return total;
  }

  double mean_effort() const {
    return integrate([](double e) { return e; }) / total_mass();
  }

  double min_effort() const {
    double lo = std::numeric_limits<double>::infinity();
    if (!atoms_.empty()) lo = atoms_.front().effort;
    for (const auto& s : segments_) lo = std::min(lo, s.grid.front());
    return lo;
  }

  double max_effort() const {
    double hi = 0.0;
    if (!atoms_.empty()) hi = atoms_.back().effort;
    for (const auto& s : segments_) hi = std::max(hi, s.grid.back());
    return hi;
  }

  /// Replaces density segments by atoms at the grid points carrying the
  /// trapezoid weights, so integrals of any g are unchanged.
  EffortMeasure discretized() const {
    std::vector<Atom> out = atoms_;
    for (const auto& s : segments_) {
      const std::size_t n = s.grid.size();
      for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? s.grid[i] - s.grid[i - 1] : 0.0;
        const double right = i + 1 < n ? s.grid[i + 1] - s.grid[i] : 0.0;
        out.push_back({s.grid[i], 0.5 * (left + right) * s.weights[i]});
      }
    }
    return EffortMeasure(std::move(out));
  }

  friend bool operator==(const EffortMeasure&, const EffortMeasure&) = default;

 private:
  std::vector<Atom> atoms_;
  std::vector<DensitySegment> segments_;
};

inline EffortMeasure dirac(double effort) { return EffortMeasure::dirac(effort); }

inline double total_mass(const EffortMeasure& p) { return p.total_mass(); }

template <class G>
double integrate(const EffortMeasure& p, G&& g) {
  return p.integrate(std::forward<G>(g));
}

/// alpha * p, for alpha in (0, 1].
inline EffortMeasure scale(const EffortMeasure& p, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("scale factor must lie in (0, 1]");
  std::vector<Atom> atoms = p.atoms();
  for (auto& a : atoms) a.mass *= alpha;
  std::vector<DensitySegment> segs = p.segments();
  for (auto& s : segs)
    for (auto& w : s.weights) w *= alpha;
  return EffortMeasure(std::move(atoms), std::move(segs));
}

/// Convex combination alpha * p + (1 - alpha) * q.
inline EffortMeasure mix(double alpha, const EffortMeasure& p, const EffortMeasure& q) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("mixing weight must lie in [0, 1]");
  std::vector<Atom> atoms;
  std::vector<DensitySegment> segs;
  auto add = [&](const EffortMeasure& m, double w) {
    if (w == 0.0) return;
    for (auto a : m.atoms()) {
      a.mass *= w;
      atoms.push_back(a);
    }
    for (auto s : m.segments()) {
      for (auto& x : s.weights) x *= w;
      segs.push_back(std::move(s));
    }
  };
  add(p, alpha);
  add(q, 1.0 - alpha);
  return EffortMeasure(std::move(atoms), std::move(segs));
}

/// p translated by a > 0: every effort e moves to e + a.
inline EffortMeasure right_shift(const EffortMeasure& p, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("right shift must be positive");
  std::vector<Atom> atoms = p.atoms();
  for (auto& at : atoms) at.effort += a;
  std::vector<DensitySegment> segs = p.segments();
  for (auto& s : segs)
    for (auto& x : s.grid) x += a;
  return EffortMeasure(std::move(atoms), std::move(segs));
}

}  // namespace rpf
