#include "doctest.h"

#include <cmath>
#include <vector>

#include "devtree/jump.hpp"
#include "devtree/model.hpp"
#include "devtree/rng.hpp"
#include "helpers.hpp"
#include "stats.hpp"

using namespace devtree;

namespace {

TstConfiguration make_config(const TraitCatalog& cat, std::vector<int> traits,
                             std::vector<bool> present) {
  TstConfiguration cfg;
  cfg.traits = std::move(traits);
  cfg.present = std::move(present);
  cfg.masses.resize(cfg.traits.size());
  for (std::size_t i = 0; i < cfg.traits.size(); ++i)
    cfg.masses[i] = cfg.present[i] ? equilibrium_mass(cat, cfg.traits[i]) : 0.0;
  return cfg;
}

} // namespace

TEST_CASE("mutant policies walk their candidate orders") {
  auto cat = testutil::ladder({3.0, 6.0, 8.0});
  const auto order = fitness_order(cat);

  cat.mutant_policy.kind = MutantPolicyKind::FitterThanAll;
  CHECK(next_mutant(cat, order, {true, false, false}) == 1);
  CHECK(next_mutant(cat, order, {true, true, false}) == 2);
  CHECK(next_mutant(cat, order, {true, true, true}) == -1);
  // A gap below the top is never offered: everything fitter counts from the
  // highest discovered rung.
  CHECK(next_mutant(cat, order, {false, false, true}) == -1);

  cat.mutant_policy.kind = MutantPolicyKind::NextInCatalog;
  CHECK(next_mutant(cat, order, {true, false, true}) == 1);

  cat.mutant_policy.kind = MutantPolicyKind::ExplicitSequence;
  cat.mutant_policy.sequence = {2, 0};
  CHECK(next_mutant(cat, order, {true, false, false}) == 2);
  CHECK(next_mutant(cat, order, {true, false, true}) == -1);
}

TEST_CASE("substitution chain rates on the reference ladder") {
  const auto cat = testutil::ladder({3.0, 6.0, 8.0, 10.0});

  const auto from_x0 = tss_jump_rates(cat, 0);
  REQUIRE(from_x0.size() == 1);
  CHECK(from_x0[0].first == 1);
  CHECK(from_x0[0].second == doctest::Approx(0.75).epsilon(1e-15));

  const auto from_x1 = tss_jump_rates(cat, 1);
  REQUIRE(from_x1.size() == 1);
  CHECK(from_x1[0].first == 2);
  CHECK(from_x1[0].second == doctest::Approx(0.75).epsilon(1e-15));

  const auto from_x2 = tss_jump_rates(cat, 2);
  REQUIRE(from_x2.size() == 1);
  CHECK(from_x2[0].first == 3);
  CHECK(from_x2[0].second == doctest::Approx(0.8).epsilon(1e-15));

  // The top trait has no fitter candidate left.
  CHECK(tss_jump_rates(cat, 3).empty());
}

TEST_CASE("explicit substitution weight kernel overrides migration") {
  auto cat = testutil::ladder({3.0, 6.0});
  cat.tss_weight.assign(4, 0.0);
  cat.tss_weight[0 * 2 + 1] = 2.0;
  const auto rates = tss_jump_rates(cat, 0);
  REQUIRE(rates.size() == 1);
  // nbar * f+ / b * w = 3 * 3 / 6 * 2
  CHECK(rates[0].second == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("substitution chain walks the ladder and absorbs at the top") {
  const auto cat = testutil::ladder({3.0, 6.0, 8.0, 10.0});
  const TssPath path = simulate_tss(cat, 0, 1e9, 424242);
  CHECK(path.absorbed);
  REQUIRE(path.segments.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(path.segments[i].trait == static_cast<int>(i));
    CHECK(path.segments[i].mass ==
          doctest::Approx(equilibrium_mass(cat, static_cast<int>(i))));
    if (i > 0) CHECK(path.segments[i].time > path.segments[i - 1].time);
  }
  CHECK(path.segments[0].time == 0.0);
}

TEST_CASE("substitution chain respects the horizon") {
  const auto cat = testutil::ladder({3.0, 6.0, 8.0, 10.0});
  const TssPath path = simulate_tss(cat, 0, 1e-9, 424242);
  CHECK_FALSE(path.absorbed);
  CHECK(path.segments.size() == 1);
  CHECK(path.end_time == 1e-9);
}

TEST_CASE("substitution chain holding times are exponential") {
  const auto cat = testutil::ladder({3.0, 6.0, 8.0, 10.0});
  std::vector<double> holding;
  holding.reserve(4000);
  for (int r = 0; r < 4000; ++r) {
    const TssPath path = simulate_tss(cat, 0, 1000.0, derive_stream_seed(5, r));
    REQUIRE(path.segments.size() >= 2);
    holding.push_back(path.segments[1].time);
  }
  const double p = teststats::ks_p_value(
      holding, [](double t) { return 1.0 - std::exp(-0.75 * t); });
  CHECK(p > 0.01);
}

TEST_CASE("initial tree configuration is the bare starting trait") {
  const auto cat = testutil::ladder({3.0, 6.0, 8.0});
  const auto cfg = tst_initial(cat, 1);
  CHECK(cfg.traits == std::vector<int>{1});
  CHECK(cfg.present == std::vector<bool>{true});
  CHECK(cfg.masses == std::vector<double>{6.0});
  CHECK(cfg.generation == 0);
}

TEST_CASE("transition above the top flips everything below") {
  const auto cat = testutil::ladder({3.0, 6.0, 8.0, 10.0, 12.0});
  const auto gamma3 =
      make_config(cat, {0, 1, 2, 3}, {false, true, false, true});
  const auto next = tst_transition(cat, gamma3, 4);
  CHECK(next.traits == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(next.present == std::vector<bool>{true, false, true, false, true});
  CHECK(next.masses == std::vector<double>{3.0, 0.0, 8.0, 0.0, 12.0});
  CHECK(next.generation == gamma3.generation + 1);
}

TEST_CASE("transition into the middle keeps upper statuses and flips lower ones") {
  const auto cat = testutil::ladder({3.0, 6.0, 8.0});
  // Discovered so far: x0 and x2 with the alternating pattern (absent, present).
  const auto cfg = make_config(cat, {0, 2}, {false, true});
  const auto next = tst_transition(cat, cfg, 1);
  CHECK(next.traits == std::vector<int>{0, 1, 2});
  // x2 present stays; the mutant under it is absent; x0 flips to present.
  CHECK(next.present == std::vector<bool>{true, false, true});
  CHECK(next.masses == std::vector<double>{3.0, 0.0, 8.0});
}

TEST_CASE("transition rejects mutants already in the configuration") {
  const auto cat = testutil::ladder({3.0, 6.0});
  const auto cfg = make_config(cat, {0}, {true});
  CHECK_THROWS_AS(tst_transition(cat, cfg, 0), Error);
}

TEST_CASE("parity oracle agrees with the transition rule on a fitness-shuffled catalog") {
  // Declaration order deliberately disagrees with the fitness order.
  TraitCatalog cat;
  cat.traits = {{"a", 8.0, 0.0, 1.0}, {"b", 3.0, 0.0, 1.0},
                {"c", 6.0, 0.0, 1.0}, {"d", 10.0, 0.0, 1.0}};
  const std::size_t n = 4;
  cat.alpha0.assign(n * n, 0.0);
  cat.migration.assign(n * n, 0.0);
  // Fitness order is b, c, a, d; band the kernel along that chain.
  const std::vector<int> chain{1, 2, 0, 3};
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) {
      const std::size_t x = static_cast<std::size_t>(chain[p]);
      const std::size_t y = static_cast<std::size_t>(chain[q]);
      const std::size_t gap = p > q ? p - q : q - p;
      if (gap <= 1) cat.alpha0[x * n + y] = 1.0;
      if (gap == 1) cat.migration[x * n + y] = 0.5;
    }
  REQUIRE(fitness_order(cat) == chain);

  // Configuration {b, a} = ranks 0 and 2; insert c (rank 1) between them.
  const auto cfg = make_config(cat, {1, 0}, {false, true});
  const auto next = tst_transition(cat, cfg, 2);
  const auto bits = parity_flip_oracle(cat, cfg, 2);
  CHECK(next.traits == std::vector<int>{1, 2, 0});
  REQUIRE(bits.size() == next.present.size());
  for (std::size_t i = 0; i < bits.size(); ++i)
    CHECK(next.present[i] == bits[i]);
}

TEST_CASE("tree mutation pressure counts present traits while candidates remain") {
  auto cat = testutil::ladder({3.0, 6.0, 8.0, 10.0});
  cat.traits[0].mu = 2.0;
  const auto gamma2 = make_config(cat, {0, 1, 2}, {true, false, true});
  const auto rates = tst_mutation_rates(cat, gamma2);
  REQUIRE(rates.size() == 2);
  CHECK(rates[0].first == 0);
  CHECK(rates[0].second == doctest::Approx(3.0 * 2.0)); // nbar * mu
  CHECK(rates[1].first == 2);
  CHECK(rates[1].second == doctest::Approx(8.0));

  // With every trait discovered the policy is exhausted: pressure vanishes.
  const auto full =
      make_config(cat, {0, 1, 2, 3}, {false, true, false, true});
  for (const auto& [trait, rate] : tst_mutation_rates(cat, full))
    CHECK(rate == 0.0);
}

TEST_CASE("tree simulation walks the exact alternating ladder") {
  const auto cat = testutil::ladder({3.0, 6.0, 8.0, 10.0, 12.0});
  const TstPath path = simulate_tst(cat, 0, 1e9, 777);
  CHECK(path.exhausted);
  REQUIRE(path.steps.size() == 5);

  CHECK(path.steps[0].time == 0.0);
  CHECK(path.steps[0].source == -1);
  CHECK(path.steps[0].mutant == -1);

  for (std::size_t n = 0; n < 5; ++n) {
    const auto& cfg = path.steps[n].config;
    REQUIRE(cfg.traits.size() == n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      CHECK(cfg.traits[i] == static_cast<int>(i));
      const bool want = ((n - i) % 2) == 0;
      CHECK(cfg.present[i] == want);
      CHECK(cfg.masses[i] ==
            (want ? equilibrium_mass(cat, static_cast<int>(i)) : 0.0));
    }
    if (n > 0) {
      CHECK(path.steps[n].mutant == static_cast<int>(n));
      CHECK(path.steps[n].time > path.steps[n - 1].time);
    }
  }
}

TEST_CASE("tree configurations project onto dense catalog vectors") {
  const auto cat = testutil::ladder({3.0, 6.0, 8.0, 10.0});
  const auto cfg = make_config(cat, {0, 1, 2}, {true, false, true});
  const Configuration dense = cfg.to_configuration(cat.size());
  REQUIRE(dense.size() == 4);
  CHECK(dense[0] == 3.0);
  CHECK(dense[1] == 0.0);
  CHECK(dense[2] == 8.0);
  CHECK(dense[3] == 0.0); // undiscovered traits read as zero mass
}

TEST_CASE("tree simulation horizon cuts the path short") {
  const auto cat = testutil::ladder({3.0, 6.0, 8.0});
  const TstPath path = simulate_tst(cat, 0, 1e-9, 777);
  CHECK_FALSE(path.exhausted);
  CHECK(path.steps.size() == 1);
  CHECK(path.end_time == 1e-9);
}

TEST_CASE("tree waiting times scale inversely with mutation pressure") {
  // First jump out of {x0} waits Exp(nbar * mu) = Exp(3 * mu): doubling mu
  // must halve the mean wait.
  auto slow = testutil::ladder({3.0, 6.0, 8.0});
  auto fast = slow;
  for (auto& t : fast.traits) t.mu = 2.0;

  double slow_sum = 0.0, fast_sum = 0.0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    slow_sum += simulate_tst(slow, 0, 1e9, derive_stream_seed(11, r)).steps[1].time;
    fast_sum += simulate_tst(fast, 0, 1e9, derive_stream_seed(11, r)).steps[1].time;
  }
  CHECK(slow_sum / reps == doctest::Approx(1.0 / 3.0).epsilon(0.08));
  CHECK(fast_sum / reps == doctest::Approx(1.0 / 6.0).epsilon(0.08));
}
