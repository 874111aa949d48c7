#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "devtree/model.hpp"
#include "devtree/numeric.hpp"
#include "devtree/rng.hpp"

namespace devtree {

// Exact event-by-event simulation of the finite-population process.
// Individuals of trait x give birth at rate b, die naturally at rate d and
// by competition at rate sum_y alpha0(x,y) * N_y / K, migrate to discovered
// fitness-order neighbors at rate eps * m(x,y), and mutate at rate
// sigma * mu(x) while the mutant policy has a candidate left. Events are
// aggregated per trait; one exponential clock over the total rate plus one
// uniform selector reproduce the per-individual process exactly.

enum class EventKind : std::uint8_t {
  ClonalBirth = 0,
  NaturalDeath = 1,
  CompetitionDeath = 2,
  Migration = 3,
  Mutation = 4,
};
inline constexpr std::size_t kEventKinds = 5;

const char* event_kind_name(EventKind k);

struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::ClonalBirth;
  int from = -1;
  int to = -1; // equals from for births and deaths
};

struct PopulationState {
  std::vector<std::int64_t> counts;  // individuals per declared trait
  std::vector<bool> discovered;      // ever-present traits
  double time = 0.0;
};

struct EventChannel {
  EventKind kind;
  int from;
  int to;
  double rate;
};

struct EventRates {
  std::vector<EventChannel> channels;
  double total = 0.0;
  std::array<double, kEventKinds> by_kind{};
};

EventRates event_rates(const TraitCatalog& cat, const ScalingRegime& regime,
                       const PopulationState& state,
                       const NumericPolicy& pol = default_policy());

// One event, drawn and applied in place. Throws AbsorbingState when the
// total rate is zero. Exactly two RNG draws per call.
EventRecord step(const TraitCatalog& cat, const ScalingRegime& regime,
                 PopulationState& state, Rng& rng,
                 const NumericPolicy& pol = default_policy());

// Reusable engine for long runs: caches the fitness order, the mutant
// candidate and the running totals so each event costs O(traits^2) with no
// allocation. step() above is a thin wrapper over one-shot engines.
class SimEngine {
public:
  SimEngine(const TraitCatalog& cat, const ScalingRegime& regime,
            PopulationState initial, std::uint64_t seed,
            const NumericPolicy& pol = default_policy());

  // Advances by one event. Returns false when the state is absorbing
  // (total rate zero); the state is then frozen.
  bool advance();

  const PopulationState& state() const { return state_; }
  const EventRecord& last_event() const { return last_; }
  const std::array<std::uint64_t, kEventKinds>& event_counts() const {
    return event_counts_;
  }
  double total_population() const { return static_cast<double>(total_count_); }
  // First time each trait's count returned to zero after being positive;
  // NaN where that never happened.
  const std::vector<double>& first_zero_time() const { return first_zero_; }

  std::int64_t population_cap = 100000000; // hard explosion guard

private:
  void apply(EventKind kind, int from, int to, double t);

  const TraitCatalog cat_;
  ScalingRegime regime_;
  NumericPolicy pol_;
  PopulationState state_;
  Rng rng_;
  EventRecord last_{};
  std::array<std::uint64_t, kEventKinds> event_counts_{};
  std::vector<double> first_zero_;
  std::vector<int> order_pos_;
  std::vector<int> neighbors_; // flattened adjacency (up to 2 per trait)
  std::vector<int> neighbor_off_;
  std::vector<double> comp_load_; // scratch: sum_y alpha(x,y) N_y / K
  std::vector<int> order_;
  int candidate_ = -1;
  std::int64_t total_count_ = 0;
};

struct GridSpec {
  // Uniform grid with `points` samples covering [0, horizon], or explicit
  // strictly increasing times starting at 0 and ending at horizon.
  std::size_t points = 101;
  std::vector<double> times;

  std::vector<double> materialize(double horizon) const;
};

struct SimOptions {
  double horizon = 1.0;
  GridSpec grid;
  bool record_events = false;
  std::int64_t population_cap = 100000000;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Configuration> states; // densities N/K, left-continuous samples
  std::array<std::uint64_t, kEventKinds> event_counts{};
  std::vector<EventRecord> events; // only when recorded
  std::vector<double> first_zero_time;
  bool absorbed = false;
};

// discovered: empty means default (all traits when the mutation channel is
// inert, otherwise the support of the initial configuration).
Trajectory simulate(const TraitCatalog& cat, const ScalingRegime& regime,
                    const Configuration& initial,
                    const std::vector<int>& discovered, const SimOptions& opt,
                    std::uint64_t seed,
                    const NumericPolicy& pol = default_policy());

// Initial counts: densities * K, each required to be within 1e-9 of an
// integer. The discovered default mirrors simulate().
PopulationState initial_state(const TraitCatalog& cat,
                              const ScalingRegime& regime,
                              const Configuration& initial,
                              const std::vector<int>& discovered);

struct EnsembleStats {
  std::vector<double> times;
  // Indexed [time][trait].
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> variance;
  std::vector<std::vector<double>> p5;
  std::vector<std::vector<double>> p95;
  std::size_t replicates = 0;
};

// Replicate r uses the stream seed derive_stream_seed(base_seed, r), so the
// aggregate is byte-identical for any worker count. Aggregation uses
// pairwise summation in replicate order.
EnsembleStats run_ensemble(const TraitCatalog& cat, const ScalingRegime& regime,
                           const Configuration& initial,
                           const std::vector<int>& discovered,
                           const SimOptions& opt, std::size_t replicates,
                           std::uint64_t base_seed, unsigned workers = 0,
                           const NumericPolicy& pol = default_policy());

} // namespace devtree
