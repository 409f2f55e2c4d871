#pragma once

// Continuous-time TASEP on a ring of L sites with site disorder: a particle
// at site i jumps to i + 1 (mod L) at rate alpha(i) when i + 1 is empty.
// Bond i is the pair (i, i + 1). Events are drawn with the Gillespie direct
// method over a Fenwick tree of active bond rates.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dtasep/env.hpp"
#include "dtasep/errors.hpp"
#include "dtasep/parallel.hpp"
#include "dtasep/random.hpp"
#include "dtasep/shape.hpp"
#include "dtasep/stats.hpp"

namespace dtasep::sim {

// Fenwick tree over nonnegative weights with O(log n) update and inverse-CDF
// lookup.
class RateTree {
public:
  RateTree() = default;
  explicit RateTree(std::span<const double> weights) { rebuild(weights); }

  void rebuild(std::span<const double> weights) {
    n_ = weights.size();
    tree_.assign(n_ + 1, 0.0);
    for (std::size_t k = 0; k < n_; ++k) {
      tree_[k + 1] += weights[k];
      const std::size_t parent = (k + 1) + ((k + 1) & (~(k + 1) + 1));
      if (parent <= n_) tree_[parent] += tree_[k + 1];
    }
    top_ = n_ == 0 ? 0 : std::bit_floor(n_);
  }

  void add(std::size_t k, double delta) {
    for (std::size_t p = k + 1; p <= n_; p += p & (~p + 1)) tree_[p] += delta;
  }

  double total() const {
    double s = 0.0;
    for (std::size_t p = n_; p > 0; p -= p & (~p + 1)) s += tree_[p];
    return s;
  }

  // Smallest k with prefix(k + 1) > target, clamped to n - 1.
  std::size_t find(double target) const {
    std::size_t pos = 0;
    for (std::size_t step = top_; step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next <= n_ && tree_[next] <= target) {
        pos = next;
        target -= tree_[next];
      }
    }
    return std::min(pos, n_ - 1);
  }

  std::size_t size() const noexcept { return n_; }

private:
  std::size_t n_ = 0;
  std::size_t top_ = 0;
  std::vector<double> tree_;
};

struct EventRecord {
  std::size_t bond = 0;
  double dt = 0.0;
  double time = 0.0;
};

/// Ring configuration plus the incrementally maintained active-bond index.
class RingState {
public:
  RingState(std::vector<double> rates, std::vector<std::uint8_t> occupancy)
      : rates_(std::move(rates)), occ_(std::move(occupancy)) {
    if (rates_.size() != occ_.size()) throw ParameterError("rates and occupancy lengths differ");
    if (occ_.size() < 2) throw ParameterError("ring needs at least two sites");
    for (double a : rates_)
      if (!(a > 0.0)) throw ParameterError("ring rates must be positive");
    n_ = static_cast<std::size_t>(std::count(occ_.begin(), occ_.end(), std::uint8_t{1}));
    bond_rate_.resize(occ_.size());
    crossings_.assign(occ_.size(), 0);
    rebuild_index();
  }

  std::size_t size() const noexcept { return occ_.size(); }
  std::size_t particles() const noexcept { return n_; }
  double clock() const noexcept { return clock_; }
  std::uint64_t events() const noexcept { return events_; }
  const std::vector<std::uint8_t>& occupancy() const noexcept { return occ_; }
  const std::vector<double>& rates() const noexcept { return rates_; }
  const std::vector<std::uint64_t>& crossings() const noexcept { return crossings_; }

  bool active(std::size_t i) const noexcept { return occ_[i] && !occ_[next(i)]; }
  bool indexed_active(std::size_t i) const noexcept { return bond_rate_[i] > 0.0; }

  std::size_t active_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(bond_rate_.begin(), bond_rate_.end(), [](double v) { return v > 0.0; }));
  }

  double total_rate() const { return tree_.total(); }

  void reset_counters() {
    std::fill(crossings_.begin(), crossings_.end(), 0);
  }

  // Draws the next event but applies it only if it happens before `horizon`.
  // Otherwise the clock is moved to `horizon` and nothing changes; the
  // dynamics are memoryless, so discarding the pending event is exact.
  template <class Rng>
  bool step_until(Rng& rng, double horizon, EventRecord* record = nullptr) {
    const double total = tree_.total();
    if (!(total > 0.0)) throw InvariantViolation("no active bond on the ring");
    const double dt = rng.exponential(total);
    if (clock_ + dt > horizon) {
      clock_ = horizon;
      return false;
    }
    const std::size_t bond = choose(rng, total);
    clock_ += dt;
    apply(bond);
    if (record) *record = {bond, dt, clock_};
    return true;
  }

  /// One Gillespie step: advance the clock by Exp(total rate), pick bond i
  /// with probability alpha(i) / sum of active rates, move the particle.
  template <class Rng>
  EventRecord step(Rng& rng) {
    EventRecord rec;
    step_until(rng, std::numeric_limits<double>::infinity(), &rec);
    return rec;
  }

  // Recomputes the active set from occupancy and compares with the index.
  bool index_consistent() const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < occ_.size(); ++i) {
      count += occ_[i];
      const double expect = active(i) ? rates_[i] : 0.0;
      if (bond_rate_[i] != expect) return false;
    }
    return count == n_;
  }

private:
  std::size_t next(std::size_t i) const noexcept { return i + 1 == occ_.size() ? 0 : i + 1; }
  std::size_t prev(std::size_t i) const noexcept { return i == 0 ? occ_.size() - 1 : i - 1; }

  void rebuild_index() {
    for (std::size_t i = 0; i < occ_.size(); ++i) bond_rate_[i] = active(i) ? rates_[i] : 0.0;
    tree_.rebuild(bond_rate_);
    updates_since_rebuild_ = 0;
  }

  template <class Rng>
  std::size_t choose(Rng& rng, double total) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const std::size_t k = tree_.find(rng.uniform() * total);
      if (bond_rate_[k] > 0.0) return k;
      // Only reachable through accumulated rounding in the tree.
      rebuild_index();
      total = tree_.total();
    }
    throw InvariantViolation("bond selection failed repeatedly");
  }

  void refresh(std::size_t i) {
    const double want = active(i) ? rates_[i] : 0.0;
    if (want != bond_rate_[i]) {
      tree_.add(i, want - bond_rate_[i]);
      bond_rate_[i] = want;
      ++updates_since_rebuild_;
    }
  }

  void apply(std::size_t bond) {
    const std::size_t to = next(bond);
    occ_[bond] = 0;
    occ_[to] = 1;
    ++crossings_[bond];
    ++events_;
    refresh(prev(bond));
    refresh(bond);
    refresh(to);
    if (updates_since_rebuild_ >= rebuild_interval) rebuild_index();
  }

  static constexpr std::size_t rebuild_interval = std::size_t{1} << 22;

  std::vector<double> rates_;
  std::vector<std::uint8_t> occ_;
  std::vector<double> bond_rate_;
  std::vector<std::uint64_t> crossings_;
  RateTree tree_;
  std::size_t n_ = 0;
  double clock_ = 0.0;
  std::uint64_t events_ = 0;
  std::size_t updates_since_rebuild_ = 0;
};

inline std::size_t particle_count(std::size_t L, double rho) {
  return static_cast<std::size_t>(std::llround(rho * static_cast<double>(L)));
}

inline void validate_ring(std::size_t L, double rho) {
  if (L < 4) throw ParameterError("ring size L must be >= 4");
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0, 1)");
  const std::size_t n = particle_count(L, rho);
  if (n == 0 || n == L)
    throw ParameterError("degenerate density: rho = " + std::to_string(rho) + " puts " + std::to_string(n) +
                         " particles on " + std::to_string(L) + " sites");
}

// Rates alpha(0..L-1) of the environment, which must cover those indices.
inline std::vector<double> ring_rates(const Environment& env, std::size_t L) {
  if (!env.contains(0) || !env.contains(static_cast<std::int64_t>(L) - 1))
    throw DomainError("environment does not cover ring sites [0, L-1]");
  std::vector<double> rates(L);
  for (std::size_t i = 0; i < L; ++i) rates[i] = env[static_cast<std::int64_t>(i)];
  return rates;
}

/// Places N = round(rho L) particles uniformly at random (partial
/// Fisher-Yates driven by the placement seed).
inline RingState init_ring(const Environment& env, std::size_t L, double rho, std::uint64_t placement_seed) {
  validate_ring(L, rho);
  const std::size_t n = particle_count(L, rho);
  std::vector<std::size_t> sites(L);
  for (std::size_t i = 0; i < L; ++i) sites[i] = i;
  EventRng rng(placement_seed);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.bits() % (L - k));
    std::swap(sites[k], sites[pick]);
  }
  std::vector<std::uint8_t> occ(L, 0);
  for (std::size_t k = 0; k < n; ++k) occ[sites[k]] = 1;
  return RingState(ring_rates(env, L), std::move(occ));
}

// Exact stationary per-bond flux of the homogeneous ring: every configuration
// with N particles is equally likely, so P(bond active) = N(L-N) / (L(L-1)).
inline double homogeneous_ring_flux(double r, std::size_t L, std::size_t N) {
  const double l = static_cast<double>(L);
  const double n = static_cast<double>(N);
  return r * n * (l - n) / (l * (l - 1.0));
}

struct MeasureParams {
  double burn_in = 0.0;
  double window = 1.0;
  std::size_t batches = 16;
};

/// Burn-in heuristic: 10 L / r time units, i.e. long enough for density
/// waves (speed at most max_rate) to cross the ring many times.
inline double default_burn_in(std::size_t L, double r) { return 10.0 * static_cast<double>(L) / r; }

struct FluxMeasurement {
  double rho = 0.0;
  std::size_t L = 0;
  std::size_t N = 0;
  double burn_in = 0.0;
  double window = 0.0;
  std::size_t batches = 0;
  std::vector<std::uint64_t> batch_crossings;
  std::vector<std::uint64_t> bond_crossings;  // over the whole window
  std::uint64_t events = 0;                   // during the window
  double estimate = 0.0;                      // crossings / (window L)
  double sem = 0.0;                           // batch means
  double first_half = 0.0;                    // burn-in adequacy monitor
  double second_half = 0.0;
  std::uint64_t placement_seed = 0;
  std::uint64_t dynamics_seed = 0;
};

/// Runs burn-in, then counts crossings on every bond over `window`, split
/// into equal-time batches.
inline FluxMeasurement measure_flux(const Environment& env, std::size_t L, double rho, const MeasureParams& p,
                                    std::uint64_t placement_seed, std::uint64_t dynamics_seed) {
  if (p.batches < 8) throw ParameterError("at least 8 batches are required");
  if (!(p.window > 0.0)) throw ParameterError("window must be positive");
  if (!(p.burn_in >= 0.0)) throw ParameterError("burn_in must be nonnegative");
  RingState state = init_ring(env, L, rho, placement_seed);
  EventRng rng(dynamics_seed);
  while (state.step_until(rng, p.burn_in)) {
  }
  state.reset_counters();

  FluxMeasurement m;
  m.rho = rho;
  m.L = L;
  m.N = state.particles();
  m.burn_in = p.burn_in;
  m.window = p.window;
  m.batches = p.batches;
  m.placement_seed = placement_seed;
  m.dynamics_seed = dynamics_seed;
  m.batch_crossings.assign(p.batches, 0);

  const double batch_len = p.window / static_cast<double>(p.batches);
  const std::uint64_t start_events = state.events();
  for (std::size_t b = 0; b < p.batches; ++b) {
    const double end = p.burn_in + batch_len * static_cast<double>(b + 1);
    const std::uint64_t before = state.events();
    while (state.step_until(rng, end)) {
    }
    m.batch_crossings[b] = state.events() - before;
  }
  m.events = state.events() - start_events;
  m.bond_crossings = state.crossings();

  const double per = 1.0 / (batch_len * static_cast<double>(L));
  std::vector<double> batch_flux(p.batches);
  for (std::size_t b = 0; b < p.batches; ++b) batch_flux[b] = static_cast<double>(m.batch_crossings[b]) * per;
  const auto ms = mean_sem(batch_flux);
  m.estimate = static_cast<double>(m.events) / (p.window * static_cast<double>(L));
  m.sem = ms.sem;
  const std::size_t half = p.batches / 2;
  m.first_half = mean_sem(std::span<const double>(batch_flux.data(), half)).mean;
  m.second_half = mean_sem(std::span<const double>(batch_flux.data() + half, p.batches - half)).mean;
  return m;
}

struct FluxCurveOptions {
  std::uint64_t master_seed = 1;
  std::string label = "flux-curve";
  // 1: one environment shared by the whole grid. > 1: the curve averages
  // independent environments and the sem is taken across them.
  std::size_t realizations = 1;
  unsigned workers = 1;
};

struct FluxCurve {
  std::vector<shape::FluxEstimate> estimates;
  std::vector<FluxMeasurement> measurements;  // rho-major, realization-minor
  std::vector<std::uint64_t> environment_seeds;
};

/// One flux measurement per (rho, realization). Environment seeds are
/// derive_seed(master, label, realization, "alpha"); run seeds are keyed by
/// the task index rho_index * realizations + realization.
inline FluxCurve flux_curve(const DisorderLaw& law, std::size_t L, const std::vector<double>& rho_grid,
                            const MeasureParams& p, const FluxCurveOptions& opt = {}) {
  validate(law);
  if (rho_grid.empty()) throw ParameterError("rho grid must be nonempty");
  if (opt.realizations == 0) throw ParameterError("realizations must be >= 1");
  for (double rho : rho_grid) validate_ring(L, rho);

  FluxCurve out;
  std::vector<Environment> envs;
  for (std::size_t e = 0; e < opt.realizations; ++e) {
    out.environment_seeds.push_back(derive_seed(opt.master_seed, opt.label, e, "alpha"));
    envs.emplace_back(law, out.environment_seeds.back(), 0, static_cast<std::int64_t>(L) - 1);
  }
  const std::size_t tasks = rho_grid.size() * opt.realizations;
  out.measurements.resize(tasks);
  parallel_for(tasks, opt.workers, [&](std::size_t t) {
    const std::size_t k = t / opt.realizations;
    const std::size_t e = t % opt.realizations;
    out.measurements[t] = measure_flux(envs[e], L, rho_grid[k], p, derive_seed(opt.master_seed, opt.label, t, "placement"),
                                       derive_seed(opt.master_seed, opt.label, t, "dynamics"));
  });

  for (std::size_t k = 0; k < rho_grid.size(); ++k) {
    shape::FluxEstimate est{rho_grid[k], 0.0, 0.0, shape::FluxSource::simulation};
    if (opt.realizations == 1) {
      est.value = out.measurements[k].estimate;
      est.sem = out.measurements[k].sem;
    } else {
      std::vector<double> vals;
      for (std::size_t e = 0; e < opt.realizations; ++e)
        vals.push_back(out.measurements[k * opt.realizations + e].estimate);
      const auto ms = mean_sem(vals);
      est.value = ms.mean;
      est.sem = ms.sem;
    }
    out.estimates.push_back(est);
  }
  return out;
}

}  // namespace dtasep::sim
