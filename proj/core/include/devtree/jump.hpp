#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "devtree/model.hpp"
#include "devtree/numeric.hpp"

namespace devtree {

// Next mutant under the catalog's policy given which traits have ever been
// present. Returns -1 when the policy has nothing left to offer.
int next_mutant(const TraitCatalog& cat, const std::vector<int>& order,
                const std::vector<bool>& discovered);

// Monomorphic substitution chain. Time is measured in mutation-timescale
// units, so the rates below are used as-is.

// Jump rates out of resident z: for each policy candidate y,
// rate = nbar(z) * max(f(y, z), 0) / b(y) * w(z, y).
std::vector<std::pair<int, double>> tss_jump_rates(
    const TraitCatalog& cat, int z, const NumericPolicy& pol = default_policy());

struct TssSegment {
  double time = 0.0; // entry time of this resident
  int trait = 0;
  double mass = 0.0; // nbar of the resident
};

struct TssPath {
  std::vector<TssSegment> segments;
  bool absorbed = false; // no candidate with positive rate remained
  double end_time = 0.0;
};

TssPath simulate_tss(const TraitCatalog& cat, int start, double horizon,
                     std::uint64_t seed,
                     const NumericPolicy& pol = default_policy());

// Alternating-presence configuration: traits sorted from least to most fit,
// every other one counted from the top present, the top always present.
// Present traits carry their equilibrium mass, absent ones zero.
struct TstConfiguration {
  std::vector<int> traits;    // catalog indices, ascending fitness
  std::vector<bool> present;
  std::vector<double> masses;
  int generation = 0;

  Configuration to_configuration(std::size_t catalog_size) const;
};

TstConfiguration tst_initial(const TraitCatalog& cat, int start,
                             const NumericPolicy& pol = default_policy());

// Local transition rule: insert the mutant into the order; it is present
// iff its nearest fitter neighbor was absent (or it is fitter than all);
// traits above the insertion keep their status, traits below flip.
TstConfiguration tst_transition(const TraitCatalog& cat,
                                const TstConfiguration& cfg, int mutant,
                                const NumericPolicy& pol = default_policy());

// Independent derivation of the post-insertion presence bits: merge and
// sort the trait list, force the top present, then alternate strictly
// downward. Used as the brute-force cross-check for tst_transition.
std::vector<bool> parity_flip_oracle(const TraitCatalog& cat,
                                     const TstConfiguration& cfg, int mutant,
                                     const NumericPolicy& pol = default_policy());

// Mutation pressure per present trait: nbar(x) * mu(x) when the policy has
// a candidate left, zero otherwise.
std::vector<std::pair<int, double>> tst_mutation_rates(
    const TraitCatalog& cat, const TstConfiguration& cfg,
    const NumericPolicy& pol = default_policy());

struct TstStep {
  double time = 0.0; // arrival time of this configuration
  TstConfiguration config;
  int source = -1; // trait whose mutation produced this configuration
  int mutant = -1;
};

struct TstPath {
  std::vector<TstStep> steps; // steps[0] is the initial configuration
  bool exhausted = false;     // policy ran out of mutants before the horizon
  double end_time = 0.0;
};

TstPath simulate_tst(const TraitCatalog& cat, int start, double horizon,
                     std::uint64_t seed,
                     const NumericPolicy& pol = default_policy());

} // namespace devtree
