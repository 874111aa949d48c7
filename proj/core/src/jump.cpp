#include "devtree/jump.hpp"

#include <algorithm>
#include <cmath>

#include "devtree/rng.hpp"

namespace devtree {

namespace {

std::vector<int> order_positions(const TraitCatalog& cat,
                                 const NumericPolicy& pol) {
  const auto order = fitness_order(cat, pol);
  std::vector<int> pos(cat.size(), 0);
  for (std::size_t p = 0; p < order.size(); ++p)
    pos[static_cast<std::size_t>(order[p])] = static_cast<int>(p);
  return pos;
}

void check_trait(const TraitCatalog& cat, int x) {
  if (x < 0 || static_cast<std::size_t>(x) >= cat.size())
    fail(ErrorKind::InvalidArgument,
         "trait index " + std::to_string(x) + " out of range");
}

} // namespace

int next_mutant(const TraitCatalog& cat, const std::vector<int>& order,
                const std::vector<bool>& discovered) {
  const auto& policy = cat.mutant_policy;
  switch (policy.kind) {
    case MutantPolicyKind::FitterThanAll: {
      // Lowest undiscovered rung strictly above everything discovered.
      int top = -1;
      for (std::size_t p = 0; p < order.size(); ++p)
        if (discovered[static_cast<std::size_t>(order[p])]) top = static_cast<int>(p);
      for (std::size_t p = static_cast<std::size_t>(top + 1); p < order.size(); ++p)
        if (!discovered[static_cast<std::size_t>(order[p])]) return order[p];
      return -1;
    }
    case MutantPolicyKind::NextInCatalog: {
      for (std::size_t i = 0; i < cat.size(); ++i)
        if (!discovered[i]) return static_cast<int>(i);
      return -1;
    }
    case MutantPolicyKind::ExplicitSequence: {
      for (int idx : policy.sequence) {
        check_trait(cat, idx);
        if (!discovered[static_cast<std::size_t>(idx)]) return idx;
      }
      return -1;
    }
  }
  return -1;
}

std::vector<std::pair<int, double>> tss_jump_rates(const TraitCatalog& cat,
                                                   int z,
                                                   const NumericPolicy& pol) {
  check_trait(cat, z);
  const auto order = fitness_order(cat, pol);
  std::vector<bool> discovered(cat.size(), false);
  discovered[static_cast<std::size_t>(z)] = true;

  std::vector<std::pair<int, double>> rates;
  const int y = next_mutant(cat, order, discovered);
  if (y < 0) return rates;
  const double nbar = equilibrium_mass(cat, z, pol);
  const double f = invasion_fitness(cat, y, z, pol);
  const double by = cat.traits[static_cast<std::size_t>(y)].b;
  const double rate = nbar * std::max(f, 0.0) / by * cat.w(z, y);
  rates.emplace_back(y, rate);
  return rates;
}

TssPath simulate_tss(const TraitCatalog& cat, int start, double horizon,
                     std::uint64_t seed, const NumericPolicy& pol) {
  check_trait(cat, start);
  if (!(horizon >= 0.0))
    fail(ErrorKind::InvalidArgument, "horizon must be nonnegative");
  const auto order = fitness_order(cat, pol);

  TssPath path;
  path.end_time = horizon;
  std::vector<bool> discovered(cat.size(), false);
  discovered[static_cast<std::size_t>(start)] = true;

  Rng rng(seed);
  double t = 0.0;
  int z = start;
  path.segments.push_back({0.0, z, equilibrium_mass(cat, z, pol)});

  while (true) {
    const int y = next_mutant(cat, order, discovered);
    double rate = 0.0;
    if (y >= 0) {
      const double f = invasion_fitness(cat, y, z, pol);
      rate = equilibrium_mass(cat, z, pol) * std::max(f, 0.0) /
             cat.traits[static_cast<std::size_t>(y)].b * cat.w(z, y);
    }
    if (rate <= 0.0) {
      path.absorbed = true;
      return path;
    }
    const double wait = rng.exponential(rate);
    if (t + wait > horizon) return path;
    t += wait;
    z = y;
    discovered[static_cast<std::size_t>(z)] = true;
    path.segments.push_back({t, z, equilibrium_mass(cat, z, pol)});
  }
}

Configuration TstConfiguration::to_configuration(std::size_t catalog_size) const {
  Configuration c(catalog_size, 0.0);
  for (std::size_t i = 0; i < traits.size(); ++i)
    if (present[i]) c[static_cast<std::size_t>(traits[i])] = masses[i];
  return c;
}

TstConfiguration tst_initial(const TraitCatalog& cat, int start,
                             const NumericPolicy& pol) {
  check_trait(cat, start);
  TstConfiguration cfg;
  cfg.traits = {start};
  cfg.present = {true};
  cfg.masses = {equilibrium_mass(cat, start, pol)};
  cfg.generation = 0;
  return cfg;
}

TstConfiguration tst_transition(const TraitCatalog& cat,
                                const TstConfiguration& cfg, int mutant,
                                const NumericPolicy& pol) {
  check_trait(cat, mutant);
  if (std::find(cfg.traits.begin(), cfg.traits.end(), mutant) != cfg.traits.end())
    fail(ErrorKind::InvalidArgument, "mutant trait is already in the configuration");
  const auto pos = order_positions(cat, pol);

  // Insertion slot: number of configuration traits less fit than the mutant.
  std::size_t slot = 0;
  for (std::size_t i = 0; i < cfg.traits.size(); ++i) {
    if (pos[static_cast<std::size_t>(cfg.traits[i])] <
        pos[static_cast<std::size_t>(mutant)])
      ++slot;
  }

  TstConfiguration next;
  next.generation = cfg.generation + 1;
  next.traits.reserve(cfg.traits.size() + 1);
  next.present.reserve(cfg.traits.size() + 1);

  // Below the mutant: presence flips. At the mutant: present iff the nearest
  // fitter neighbor was absent, or there is none. Above: status kept.
  for (std::size_t i = 0; i < slot; ++i) {
    next.traits.push_back(cfg.traits[i]);
    next.present.push_back(!cfg.present[i]);
  }
  const bool fitter_neighbor_present =
      slot < cfg.traits.size() && cfg.present[slot];
  next.traits.push_back(mutant);
  next.present.push_back(!fitter_neighbor_present);
  for (std::size_t i = slot; i < cfg.traits.size(); ++i) {
    next.traits.push_back(cfg.traits[i]);
    next.present.push_back(cfg.present[i]);
  }

  next.masses.resize(next.traits.size());
  for (std::size_t i = 0; i < next.traits.size(); ++i)
    next.masses[i] =
        next.present[i] ? equilibrium_mass(cat, next.traits[i], pol) : 0.0;
  return next;
}

std::vector<bool> parity_flip_oracle(const TraitCatalog& cat,
                                     const TstConfiguration& cfg, int mutant,
                                     const NumericPolicy& pol) {
  check_trait(cat, mutant);
  const auto pos = order_positions(cat, pol);

  // Rebuild the trait list from scratch, then derive every bit globally:
  // top present, strict alternation downward. Old bits are not consulted.
  std::vector<int> traits = cfg.traits;
  traits.push_back(mutant);
  std::sort(traits.begin(), traits.end(), [&](int a, int b) {
    return pos[static_cast<std::size_t>(a)] < pos[static_cast<std::size_t>(b)];
  });

  const std::size_t k = traits.size();
  std::vector<bool> bits(k, false);
  for (std::size_t i = 0; i < k; ++i)
    bits[i] = ((k - 1 - i) % 2) == 0;
  return bits;
}

std::vector<std::pair<int, double>> tst_mutation_rates(
    const TraitCatalog& cat, const TstConfiguration& cfg,
    const NumericPolicy& pol) {
  const auto order = fitness_order(cat, pol);
  std::vector<bool> discovered(cat.size(), false);
  for (int x : cfg.traits) discovered[static_cast<std::size_t>(x)] = true;
  const bool have_candidate = next_mutant(cat, order, discovered) >= 0;

  std::vector<std::pair<int, double>> rates;
  for (std::size_t i = 0; i < cfg.traits.size(); ++i) {
    if (!cfg.present[i]) continue;
    const auto& t = cat.traits[static_cast<std::size_t>(cfg.traits[i])];
    rates.emplace_back(cfg.traits[i],
                       have_candidate ? cfg.masses[i] * t.mu : 0.0);
  }
  return rates;
}

TstPath simulate_tst(const TraitCatalog& cat, int start, double horizon,
                     std::uint64_t seed, const NumericPolicy& pol) {
  if (!(horizon >= 0.0))
    fail(ErrorKind::InvalidArgument, "horizon must be nonnegative");
  const auto order = fitness_order(cat, pol);

  TstPath path;
  path.end_time = horizon;
  path.steps.push_back({0.0, tst_initial(cat, start, pol), -1, -1});

  std::vector<bool> discovered(cat.size(), false);
  discovered[static_cast<std::size_t>(start)] = true;

  Rng rng(seed);
  double t = 0.0;

  while (true) {
    const auto& cfg = path.steps.back().config;
    const int mutant = next_mutant(cat, order, discovered);
    if (mutant < 0) {
      path.exhausted = true;
      return path;
    }
    const auto rates = tst_mutation_rates(cat, cfg, pol);
    double total = 0.0;
    for (const auto& [x, r] : rates) total += r;
    if (total <= 0.0) {
      path.exhausted = true;
      return path;
    }
    const double wait = rng.exponential(total);
    if (t + wait > horizon) return path;
    t += wait;

    // Source trait drawn proportionally to its mutation pressure.
    double u = rng.uniform01() * total;
    int source = rates.back().first;
    for (const auto& [x, r] : rates) {
      if (u < r) { source = x; break; }
      u -= r;
    }

    discovered[static_cast<std::size_t>(mutant)] = true;
    path.steps.push_back({t, tst_transition(cat, cfg, mutant, pol), source, mutant});
  }
}

} // namespace devtree
