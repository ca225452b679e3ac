#pragma once

// Finite-population analogue of the continuum contest: n agents draw efforts
// from p, performances from F_e, and the top floor(k n) performers win.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "rpf/engine.hpp"
#include "rpf/errors.hpp"
#include "rpf/measures.hpp"
#include "rpf/numeric.hpp"

namespace rpf {

struct SimConfig {
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  PerformanceFamily fam = PerformanceFamily::additive(NoiseDistribution::normal());
  EffortMeasure p = dirac(1.0);
  double k = 0.3;
  std::size_t replications = 20;
  unsigned threads = 0;  ///< 0: hardware concurrency
};

/// floor(k n), robust to k n landing a rounding error below an integer.
inline std::size_t winner_count(double k, std::size_t n) {
  const double kn = k * static_cast<double>(n);
  const double r = std::round(kn);
  if (std::abs(kn - r) <= 1e-9 * std::max(1.0, kn)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::floor(kn));
}

struct AtomResult {
  double effort;
  double mass;
  double empirical_W;  ///< pooled over replications
  double model_W;
  double abs_err;
  std::uint64_t agents;
  std::uint64_t wins;
};

struct ReplicationResult {
  std::vector<std::uint64_t> agents;  ///< per atom
  std::vector<std::uint64_t> wins;    ///< per atom
  std::size_t winners;
  double cutoff;
};

struct SimResult {
  std::vector<AtomResult> atoms;
  std::vector<ReplicationResult> replications;
  double cutoff_estimate;  ///< mean of replication cutoffs
  double cutoff_model;
  std::size_t winners_expected;
};

namespace detail {

inline void validate(const SimConfig& cfg) {
  if (cfg.n < 1) throw DomainError("simulation needs at least one agent");
  require_budget(cfg.k);
  if (cfg.replications < 1) throw DomainError("simulation needs at least one replication");
  if (winner_count(cfg.k, cfg.n) < 1) throw DomainError("floor(k n) must be at least 1");
}

inline std::uint64_t replication_seed(std::uint64_t seed, std::size_t rep) {
  return numeric::splitmix64(seed ^ numeric::splitmix64(0x5eedULL + rep));
}

/// One population draw. Atoms are `p` already discretized; agents whose draw
/// lands beyond p(E) stay out and never win.
inline ReplicationResult run_replication(const SimConfig& cfg, const std::vector<Atom>& atoms, std::size_t rep) {
  std::mt19937_64 rng(replication_seed(cfg.seed, rep));
  std::vector<double> cumulative(atoms.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) cumulative[i] = (acc += atoms[i].mass);

  constexpr std::uint32_t kOut = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> atom_of(cfg.n);
  std::vector<double> perf(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double u = numeric::open_unit(rng());
    const double v = numeric::open_unit(rng());
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) {
      atom_of[i] = kOut;
      perf[i] = -std::numeric_limits<double>::infinity();
    } else {
      const auto a = static_cast<std::uint32_t>(it - cumulative.begin());
      atom_of[i] = a;
      perf[i] = cfg.fam.quantile(atoms[a].effort, v);
    }
  }

  // Seeded shuffle fixes the tie-break order; ranking is by performance, then
  // by shuffled position.
  std::vector<std::uint32_t> order(cfg.n);
  std::iota(order.begin(), order.end(), 0u);
  for (std::size_t i = cfg.n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(numeric::open_unit(rng()) * static_cast<double>(i + 1));
    std::swap(order[i], order[std::min(j, i)]);
  }
  std::vector<std::uint32_t> rank(cfg.n);
  for (std::size_t pos = 0; pos < cfg.n; ++pos) rank[order[pos]] = static_cast<std::uint32_t>(pos);
  auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (perf[a] != perf[b]) return perf[a] > perf[b];
    return rank[a] < rank[b];
  };

  const std::size_t m = winner_count(cfg.k, cfg.n);
  std::vector<std::uint32_t> idx(order);
  if (m < cfg.n) std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(), better);

  ReplicationResult out{std::vector<std::uint64_t>(atoms.size(), 0), std::vector<std::uint64_t>(atoms.size(), 0), 0, 0.0};
  for (std::size_t i = 0; i < cfg.n; ++i)
    if (atom_of[i] != kOut) ++out.agents[atom_of[i]];
  double last_winner = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    const auto i = idx[j];
    if (atom_of[i] == kOut) continue;
    ++out.wins[atom_of[i]];
    ++out.winners;
    last_winner = std::min(last_winner, perf[i]);
  }
  double first_loser = -std::numeric_limits<double>::infinity();
  if (m < cfg.n) first_loser = perf[*std::min_element(idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(), better)];
  out.cutoff = std::isfinite(first_loser) ? 0.5 * (last_winner + first_loser) : last_winner;
  return out;
}

}  // namespace detail

inline SimResult simulate(const SimConfig& cfg) {
  detail::validate(cfg);
  const EffortMeasure atomic = cfg.p.is_atomic() ? cfg.p : cfg.p.discretized();
  const auto& atoms = atomic.atoms();

  std::vector<ReplicationResult> reps(cfg.replications);
  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cfg.replications));
  if (workers <= 1) {
    for (std::size_t r = 0; r < cfg.replications; ++r) reps[r] = detail::run_replication(cfg, atoms, r);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < cfg.replications; r += workers) reps[r] = detail::run_replication(cfg, atoms, r);
      });
    }
    for (auto& t : pool) t.join();
  }

  SimResult out;
  out.winners_expected = winner_count(cfg.k, cfg.n);
  const BoundCsf model(cfg.fam, atomic, cfg.k);
  out.cutoff_model = model.cutoff() ? model.cutoff()->s : -std::numeric_limits<double>::infinity();
  double cutoff_sum = 0.0;
  for (const auto& r : reps) cutoff_sum += r.cutoff;  // fixed replication order
  out.cutoff_estimate = cutoff_sum / static_cast<double>(reps.size());
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    std::uint64_t agents = 0, wins = 0;
    for (const auto& r : reps) {
      agents += r.agents[a];
      wins += r.wins[a];
    }
    const double emp = agents ? static_cast<double>(wins) / static_cast<double>(agents) : 0.0;
    const double w = model(atoms[a].effort);
    out.atoms.push_back({atoms[a].effort, atoms[a].mass, emp, w, std::abs(emp - w), agents, wins});
  }
  out.replications = std::move(reps);
  return out;
}

/// Mean over atoms of |empirical - model| win rate.
inline double mean_abs_error(const SimResult& r) {
  double s = 0.0;
  for (const auto& a : r.atoms) s += a.abs_err;
  return r.atoms.empty() ? 0.0 : s / static_cast<double>(r.atoms.size());
}

struct ConvergenceRow {
  std::size_t n;
  double mean_err;  ///< mean over replications of the max per-atom error
  double sd;
};

/// Per-replication max absolute win-rate error, summarized for each n.
inline std::vector<ConvergenceRow> convergence_table(SimConfig cfg, const std::vector<std::size_t>& ns = {100, 1000, 10000, 100000}) {
  std::vector<ConvergenceRow> rows;
  for (std::size_t n : ns) {
    cfg.n = n;
    const auto result = simulate(cfg);
    std::vector<double> errs;
    for (const auto& rep : result.replications) {
      double worst = 0.0;
      for (std::size_t a = 0; a < result.atoms.size(); ++a) {
        if (rep.agents[a] == 0) continue;
        const double emp = static_cast<double>(rep.wins[a]) / static_cast<double>(rep.agents[a]);
        worst = std::max(worst, std::abs(emp - result.atoms[a].model_W));
      }
      errs.push_back(worst);
    }
    double mean = 0.0;
    for (double e : errs) mean += e;
    mean /= static_cast<double>(errs.size());
    double var = 0.0;
    for (double e : errs) var += (e - mean) * (e - mean);
    const double sd = errs.size() > 1 ? std::sqrt(var / static_cast<double>(errs.size() - 1)) : 0.0;
    rows.push_back({n, mean, sd});
  }
  return rows;
}

/// Least-squares slope of log(mean_err) against log(n).
inline double loglog_slope(const std::vector<ConvergenceRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (const auto& r : rows) {
    if (!(r.mean_err > 0.0)) continue;
    const double x = std::log(static_cast<double>(r.n)), y = std::log(r.mean_err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) throw NumericError("slope needs at least two positive errors");
  const double md = static_cast<double>(m);
  return (md * sxy - sx * sy) / (md * sxx - sx * sx);
}

}  // namespace rpf
