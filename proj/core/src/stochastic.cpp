#include "devtree/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "devtree/jump.hpp"

namespace devtree {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Shared channel enumeration. Every consumer (reference rate table, engine
// total, engine selection) walks channels in exactly this order:
// per trait x ascending: birth, natural death, competition death,
// migration to each discovered neighbor (ascending target index), mutation.
// The visitor returns false to stop early.
template <class Visitor>
void for_each_channel(const TraitCatalog& cat, const ScalingRegime& regime,
                      const std::vector<std::int64_t>& counts,
                      const std::vector<bool>& discovered,
                      const std::vector<int>& neighbors,
                      const std::vector<int>& neighbor_off,
                      const std::vector<double>& comp_load, int candidate,
                      Visitor&& visit) {
  const int n = static_cast<int>(cat.size());
  for (int x = 0; x < n; ++x) {
    const double nx = static_cast<double>(counts[static_cast<std::size_t>(x)]);
    if (nx == 0.0) continue;
    const auto& t = cat.traits[static_cast<std::size_t>(x)];
    if (t.b > 0.0)
      if (!visit(EventKind::ClonalBirth, x, x, nx * t.b)) return;
    if (t.d > 0.0)
      if (!visit(EventKind::NaturalDeath, x, x, nx * t.d)) return;
    const double cl = comp_load[static_cast<std::size_t>(x)];
    if (cl > 0.0)
      if (!visit(EventKind::CompetitionDeath, x, x, nx * cl)) return;
    if (regime.epsilon > 0.0) {
      for (int k = neighbor_off[static_cast<std::size_t>(x)];
           k < neighbor_off[static_cast<std::size_t>(x) + 1]; ++k) {
        const int y = neighbors[static_cast<std::size_t>(k)];
        if (!discovered[static_cast<std::size_t>(y)]) continue;
        const double m = cat.mig(x, y);
        if (m > 0.0)
          if (!visit(EventKind::Migration, x, y, nx * regime.epsilon * m)) return;
      }
    }
    if (candidate >= 0 && regime.sigma > 0.0 && t.mu > 0.0)
      if (!visit(EventKind::Mutation, x, candidate, nx * regime.sigma * t.mu))
        return;
  }
}

void compute_comp_loads(const TraitCatalog& cat, const ScalingRegime& regime,
                        const std::vector<std::int64_t>& counts,
                        std::vector<double>& out) {
  const int n = static_cast<int>(cat.size());
  out.resize(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) {
    double acc = 0.0;
    for (int y = 0; y < n; ++y)
      acc += cat.alpha(x, y) * static_cast<double>(counts[static_cast<std::size_t>(y)]);
    out[static_cast<std::size_t>(x)] = acc / regime.K;
  }
}

// Fitness-order neighbors per trait, targets in ascending catalog index.
void build_neighbors(const TraitCatalog& cat, const std::vector<int>& order,
                     std::vector<int>& neighbors, std::vector<int>& offsets) {
  const int n = static_cast<int>(cat.size());
  std::vector<int> pos(static_cast<std::size_t>(n), 0);
  for (std::size_t p = 0; p < order.size(); ++p)
    pos[static_cast<std::size_t>(order[p])] = static_cast<int>(p);
  neighbors.clear();
  offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int x = 0; x < n; ++x) {
    offsets[static_cast<std::size_t>(x)] = static_cast<int>(neighbors.size());
    for (int y = 0; y < n; ++y)
      if (y != x && std::abs(pos[static_cast<std::size_t>(x)] -
                             pos[static_cast<std::size_t>(y)]) == 1)
        neighbors.push_back(y);
  }
  offsets[static_cast<std::size_t>(n)] = static_cast<int>(neighbors.size());
}

bool mutation_inert(const TraitCatalog& cat, const ScalingRegime& regime) {
  if (regime.sigma <= 0.0) return true;
  for (const auto& t : cat.traits)
    if (t.mu > 0.0) return false;
  return true;
}

void check_state(const TraitCatalog& cat, const PopulationState& state) {
  if (state.counts.size() != cat.size() || state.discovered.size() != cat.size())
    fail(ErrorKind::InvalidArgument, "state size does not match catalog");
  for (std::size_t i = 0; i < cat.size(); ++i) {
    if (state.counts[i] < 0)
      fail(ErrorKind::InvalidArgument, "negative count");
    if (state.counts[i] > 0 && !state.discovered[i])
      fail(ErrorKind::InvalidArgument,
           "positive count on an undiscovered trait");
  }
}

} // namespace

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::ClonalBirth: return "clonal_birth";
    case EventKind::NaturalDeath: return "natural_death";
    case EventKind::CompetitionDeath: return "competition_death";
    case EventKind::Migration: return "migration";
    case EventKind::Mutation: return "mutation";
  }
  return "?";
}

EventRates event_rates(const TraitCatalog& cat, const ScalingRegime& regime,
                       const PopulationState& state, const NumericPolicy& pol) {
  check_state(cat, state);
  const auto order = fitness_order(cat, pol);
  std::vector<int> neighbors, offsets;
  build_neighbors(cat, order, neighbors, offsets);
  std::vector<double> loads;
  compute_comp_loads(cat, regime, state.counts, loads);
  const int candidate =
      mutation_inert(cat, regime) ? -1 : next_mutant(cat, order, state.discovered);

  EventRates rates;
  for_each_channel(cat, regime, state.counts, state.discovered, neighbors,
                   offsets, loads, candidate,
                   [&](EventKind kind, int from, int to, double r) {
                     rates.channels.push_back({kind, from, to, r});
                     rates.total += r;
                     rates.by_kind[static_cast<std::size_t>(kind)] += r;
                     return true;
                   });
  if (!std::isfinite(rates.total))
    fail(ErrorKind::Explosion, "event rates overflowed");
  return rates;
}

EventRecord step(const TraitCatalog& cat, const ScalingRegime& regime,
                 PopulationState& state, Rng& rng, const NumericPolicy& pol) {
  const auto rates = event_rates(cat, regime, state, pol);
  if (rates.total <= 0.0)
    fail(ErrorKind::AbsorbingState,
         "total event rate is zero; the state is absorbing");

  const double wait = rng.exponential(rates.total);
  double u = rng.uniform01() * rates.total;
  const EventChannel* chosen = &rates.channels.back();
  for (const auto& ch : rates.channels) {
    if (u < ch.rate) { chosen = &ch; break; }
    u -= ch.rate;
  }

  state.time += wait;
  EventRecord rec{state.time, chosen->kind, chosen->from, chosen->to};
  switch (rec.kind) {
    case EventKind::ClonalBirth:
      state.counts[static_cast<std::size_t>(rec.from)] += 1;
      break;
    case EventKind::NaturalDeath:
    case EventKind::CompetitionDeath:
      state.counts[static_cast<std::size_t>(rec.from)] -= 1;
      break;
    case EventKind::Migration:
      state.counts[static_cast<std::size_t>(rec.from)] -= 1;
      state.counts[static_cast<std::size_t>(rec.to)] += 1;
      break;
    case EventKind::Mutation:
      state.counts[static_cast<std::size_t>(rec.to)] += 1;
      state.discovered[static_cast<std::size_t>(rec.to)] = true;
      break;
  }
  return rec;
}

SimEngine::SimEngine(const TraitCatalog& cat, const ScalingRegime& regime,
                     PopulationState initial, std::uint64_t seed,
                     const NumericPolicy& pol)
    : cat_(cat), regime_(regime), pol_(pol), state_(std::move(initial)),
      rng_(seed) {
  check_state(cat_, state_);
  order_ = fitness_order(cat_, pol_);
  build_neighbors(cat_, order_, neighbors_, neighbor_off_);
  order_pos_.assign(cat_.size(), 0);
  for (std::size_t p = 0; p < order_.size(); ++p)
    order_pos_[static_cast<std::size_t>(order_[p])] = static_cast<int>(p);
  candidate_ = mutation_inert(cat_, regime_)
                   ? -1
                   : next_mutant(cat_, order_, state_.discovered);
  first_zero_.assign(cat_.size(), kNaN);
  total_count_ = 0;
  for (auto c : state_.counts) total_count_ += c;
}

bool SimEngine::advance() {
  compute_comp_loads(cat_, regime_, state_.counts, comp_load_);
  double total = 0.0;
  for_each_channel(cat_, regime_, state_.counts, state_.discovered, neighbors_,
                   neighbor_off_, comp_load_, candidate_,
                   [&](EventKind, int, int, double r) {
                     total += r;
                     return true;
                   });
  if (!std::isfinite(total))
    fail(ErrorKind::Explosion, "event rates overflowed");
  if (total <= 0.0) return false;

  const double wait = rng_.exponential(total);
  double u = rng_.uniform01() * total;

  EventKind kind = EventKind::ClonalBirth;
  int from = -1, to = -1;
  for_each_channel(cat_, regime_, state_.counts, state_.discovered, neighbors_,
                   neighbor_off_, comp_load_, candidate_,
                   [&](EventKind k, int f, int t, double r) {
                     kind = k; from = f; to = t;
                     if (u < r) return false;
                     u -= r;
                     return true;
                   });
  // Rounding can push u past the last channel; the trailing assignment above
  // then selects the final visited channel, which is the correct fallback.

  apply(kind, from, to, state_.time + wait);
  return true;
}

void SimEngine::apply(EventKind kind, int from, int to, double t) {
  state_.time = t;
  last_ = {t, kind, from, to};
  event_counts_[static_cast<std::size_t>(kind)] += 1;
  auto& counts = state_.counts;
  switch (kind) {
    case EventKind::ClonalBirth:
      counts[static_cast<std::size_t>(from)] += 1;
      ++total_count_;
      break;
    case EventKind::NaturalDeath:
    case EventKind::CompetitionDeath:
      counts[static_cast<std::size_t>(from)] -= 1;
      --total_count_;
      if (counts[static_cast<std::size_t>(from)] == 0 &&
          std::isnan(first_zero_[static_cast<std::size_t>(from)]))
        first_zero_[static_cast<std::size_t>(from)] = t;
      break;
    case EventKind::Migration:
      counts[static_cast<std::size_t>(from)] -= 1;
      counts[static_cast<std::size_t>(to)] += 1;
      if (counts[static_cast<std::size_t>(from)] == 0 &&
          std::isnan(first_zero_[static_cast<std::size_t>(from)]))
        first_zero_[static_cast<std::size_t>(from)] = t;
      break;
    case EventKind::Mutation:
      counts[static_cast<std::size_t>(to)] += 1;
      ++total_count_;
      state_.discovered[static_cast<std::size_t>(to)] = true;
      candidate_ = next_mutant(cat_, order_, state_.discovered);
      break;
  }
  if (total_count_ > population_cap)
    fail(ErrorKind::Explosion,
         "population exceeded the cap of " + std::to_string(population_cap) +
             " at t = " + std::to_string(t));
}

std::vector<double> GridSpec::materialize(double horizon) const {
  if (!(horizon > 0.0))
    fail(ErrorKind::InvalidArgument, "horizon must be positive");
  if (!times.empty()) {
    if (times.front() != 0.0 || times.back() != horizon)
      fail(ErrorKind::InvalidArgument, "explicit grid must cover [0, horizon]");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
      if (!(times[i] < times[i + 1]))
        fail(ErrorKind::InvalidArgument, "grid times must be strictly increasing");
    return times;
  }
  if (points < 2) fail(ErrorKind::InvalidArgument, "grid needs at least 2 points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = horizon * static_cast<double>(i) / static_cast<double>(points - 1);
  g.back() = horizon;
  return g;
}

PopulationState initial_state(const TraitCatalog& cat,
                              const ScalingRegime& regime,
                              const Configuration& initial,
                              const std::vector<int>& discovered) {
  if (initial.size() != cat.size())
    fail(ErrorKind::InvalidArgument,
         "initial configuration does not match the catalog");
  PopulationState st;
  st.counts.resize(cat.size());
  for (std::size_t i = 0; i < cat.size(); ++i) {
    const double raw = initial[i] * regime.K;
    if (raw < 0.0)
      fail(ErrorKind::InvalidArgument, "negative initial density");
    const double rounded = std::round(raw);
    if (std::abs(raw - rounded) > 1e-9 * std::max(1.0, std::abs(raw)))
      fail(ErrorKind::InvalidArgument,
           "initial density * K must be an integer count (got " +
               std::to_string(raw) + ")");
    st.counts[i] = static_cast<std::int64_t>(rounded);
  }
  st.discovered.assign(cat.size(), false);
  if (!discovered.empty()) {
    for (int d : discovered) {
      if (d < 0 || static_cast<std::size_t>(d) >= cat.size())
        fail(ErrorKind::InvalidArgument, "discovered index out of range");
      st.discovered[static_cast<std::size_t>(d)] = true;
    }
  } else if (mutation_inert(cat, regime)) {
    st.discovered.assign(cat.size(), true);
  } else {
    for (std::size_t i = 0; i < cat.size(); ++i)
      st.discovered[i] = st.counts[i] > 0;
  }
  for (std::size_t i = 0; i < cat.size(); ++i)
    if (st.counts[i] > 0 && !st.discovered[i])
      fail(ErrorKind::InvalidArgument,
           "initial support must be contained in the discovered set");
  return st;
}

Trajectory simulate(const TraitCatalog& cat, const ScalingRegime& regime,
                    const Configuration& initial,
                    const std::vector<int>& discovered, const SimOptions& opt,
                    std::uint64_t seed, const NumericPolicy& pol) {
  const auto grid = opt.grid.materialize(opt.horizon);
  SimEngine engine(cat, regime, initial_state(cat, regime, initial, discovered),
                   seed, pol);
  engine.population_cap = opt.population_cap;

  Trajectory traj;
  traj.times = grid;
  traj.states.reserve(grid.size());

  const double K = regime.K;
  auto densities = [&](const std::vector<std::int64_t>& counts) {
    Configuration c(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
      c[i] = static_cast<double>(counts[i]) / K;
    return c;
  };

  std::vector<std::int64_t> prev = engine.state().counts;
  std::size_t g = 0;
  // The state at t = 0 is the initial one; grids always start at 0.
  traj.states.push_back(densities(prev));
  ++g;

  while (g < grid.size()) {
    prev = engine.state().counts;
    if (!engine.advance()) {
      traj.absorbed = true;
      for (; g < grid.size(); ++g) traj.states.push_back(densities(prev));
      break;
    }
    const double te = engine.last_event().time;
    if (te > opt.horizon) {
      // The drawn event lands beyond the run; samples up to the horizon see
      // the pre-event state. The overshoot event is discarded.
      for (; g < grid.size(); ++g) traj.states.push_back(densities(prev));
      break;
    }
    while (g < grid.size() && grid[g] <= te) {
      traj.states.push_back(densities(prev));
      ++g;
    }
    if (opt.record_events) traj.events.push_back(engine.last_event());
  }

  traj.event_counts = engine.event_counts();
  traj.first_zero_time = engine.first_zero_time();
  // An overshoot event past the horizon must not leak into the run.
  const double last_applied = engine.last_event().time;
  if (last_applied > opt.horizon) {
    traj.event_counts[static_cast<std::size_t>(engine.last_event().kind)] -= 1;
    for (auto& fz : traj.first_zero_time)
      if (!std::isnan(fz) && fz > opt.horizon) fz = kNaN;
  }
  return traj;
}

namespace {

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

double percentile(std::vector<double>& sorted_scratch, double p) {
  std::sort(sorted_scratch.begin(), sorted_scratch.end());
  const std::size_t n = sorted_scratch.size();
  if (n == 1) return sorted_scratch[0];
  const double rank = p / 100.0 * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  const double frac = rank - static_cast<double>(lo);
  if (lo + 1 >= n) return sorted_scratch[n - 1];
  return sorted_scratch[lo] + frac * (sorted_scratch[lo + 1] - sorted_scratch[lo]);
}

} // namespace

EnsembleStats run_ensemble(const TraitCatalog& cat, const ScalingRegime& regime,
                           const Configuration& initial,
                           const std::vector<int>& discovered,
                           const SimOptions& opt, std::size_t replicates,
                           std::uint64_t base_seed, unsigned workers,
                           const NumericPolicy& pol) {
  if (replicates == 0)
    fail(ErrorKind::InvalidArgument, "need at least one replicate");
  if (workers == 0)
    workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(
      std::min<std::size_t>(workers, replicates));

  std::vector<Trajectory> runs(replicates);
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto work = [&](unsigned w) {
    for (std::size_t r = w; r < replicates; r += workers) {
      try {
        runs[r] = simulate(cat, regime, initial, discovered, opt,
                           derive_stream_seed(base_seed, r), pol);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  const std::size_t T = runs[0].times.size();
  const std::size_t L = cat.size();
  EnsembleStats stats;
  stats.times = runs[0].times;
  stats.replicates = replicates;
  stats.mean.assign(T, std::vector<double>(L, 0.0));
  stats.variance.assign(T, std::vector<double>(L, 0.0));
  stats.p5.assign(T, std::vector<double>(L, 0.0));
  stats.p95.assign(T, std::vector<double>(L, 0.0));

  std::vector<double> column(replicates), dev(replicates);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t r = 0; r < replicates; ++r)
        column[r] = runs[r].states[t][l];
      const double mean = pairwise_sum(column.data(), replicates) /
                          static_cast<double>(replicates);
      stats.mean[t][l] = mean;
      if (replicates > 1) {
        for (std::size_t r = 0; r < replicates; ++r) {
          const double d = column[r] - mean;
          dev[r] = d * d;
        }
        stats.variance[t][l] = pairwise_sum(dev.data(), replicates) /
                               static_cast<double>(replicates - 1);
      }
      std::vector<double> scratch = column;
      stats.p5[t][l] = percentile(scratch, 5.0);
      scratch = column;
      stats.p95[t][l] = percentile(scratch, 95.0);
    }
  }
  return stats;
}

} // namespace devtree
