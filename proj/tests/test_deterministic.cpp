#include "doctest.h"

#include <cmath>
#include <vector>

#include "devtree/deterministic.hpp"
#include "devtree/rng.hpp"
#include "helpers.hpp"

using namespace devtree;

TEST_CASE("logistic right hand side and jacobian at hand-computed points") {
  const auto cat = testutil::ladder({3.0});
  const auto sys = logistic_system(cat, 0);
  CHECK(sys.dim() == 1);
  CHECK(sys.rhs({1.0})[0] == doctest::Approx(2.0).epsilon(1e-15)); // 1*(3-1)
  CHECK(sys.rhs({3.0})[0] == doctest::Approx(0.0));
  CHECK(sys.jacobian({3.0})[0] == doctest::Approx(-3.0)); // 3 - 2*3
}

TEST_CASE("two trait right hand side and jacobian at hand-computed points") {
  const auto cat = testutil::ladder({3.0, 6.0});
  const auto sys = lv2_system(cat, 0, 1);
  const std::vector<double> n{3.0, 0.001};
  const auto r = sys.rhs(n);
  CHECK(r[0] == doctest::Approx(3.0 * (3.0 - 3.0 - 0.001)).epsilon(1e-12));
  CHECK(r[1] == doctest::Approx(0.001 * (6.0 - 3.0 - 0.001)).epsilon(1e-12));
  const auto J = sys.jacobian(n);
  CHECK(J[0] == doctest::Approx(3.0 - 2.0 * 3.0 - 0.001).epsilon(1e-12));
  CHECK(J[1] == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(J[2] == doctest::Approx(-0.001).epsilon(1e-12));
  CHECK(J[3] == doctest::Approx(6.0 - 3.0 - 0.002).epsilon(1e-12));
}

TEST_CASE("migration flux conserves total mass and vanishes with epsilon") {
  const auto cat = testutil::ladder({3.0, 6.0, 8.0, 10.0});
  const auto with = nearest_neighbor_system(cat, 0.01, true);
  const auto without = nearest_neighbor_system(cat, 0.01, false);
  CHECK(without.epsilon == 0.0);

  const std::vector<double> n{2.0, 0.5, 7.0, 0.1};
  const auto rw = with.rhs(n);
  const auto ro = without.rhs(n);
  double flux_sum = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) flux_sum += rw[i] - ro[i];
  CHECK(flux_sum == doctest::Approx(0.0).epsilon(1e-14));

  // The x0 component picks up inflow from x1 and outflow toward x1 only.
  const double expected_flux =
      0.01 * (0.5 * n[1] - 0.5 * n[0]); // m = 0.5 both ways
  CHECK(rw[0] - ro[0] == doctest::Approx(expected_flux).epsilon(1e-12));
}

TEST_CASE("analytic jacobians agree with central differences") {
  const auto cat = testutil::ladder({3.0, 6.0, 8.0, 10.0});
  Rng rng(9090);
  for (const auto& sys :
       {logistic_system(cat, 1), lv2_system(cat, 0, 1),
        nearest_neighbor_system(cat, 0.02, true)}) {
    const std::size_t m = sys.dim();
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> x(m);
      for (auto& v : x) v = 0.2 + 8.0 * rng.uniform01();
      const auto J = sys.jacobian(x);
      for (std::size_t j = 0; j < m; ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
        auto xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const auto fp = sys.rhs(xp);
        const auto fm = sys.rhs(xm);
        for (std::size_t i = 0; i < m; ++i) {
          const double fd = (fp[i] - fm[i]) / (2.0 * h);
          CHECK(J[i * m + j] == doctest::Approx(fd).epsilon(1e-6));
        }
      }
    }
  }
}

TEST_CASE("integrator reproduces the logistic closed form to tight tolerance") {
  const auto cat = testutil::ladder({3.0});
  const auto sys = logistic_system(cat, 0);
  std::vector<double> grid;
  for (int i = 0; i <= 50; ++i) grid.push_back(0.2 * i);
  const auto sol = integrate(sys, {0.5}, grid);
  REQUIRE(sol.times == grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double truth =
        3.0 / (1.0 + (3.0 / 0.5 - 1.0) * std::exp(-3.0 * grid[i]));
    CHECK(sol.states[i][0] == doctest::Approx(truth).epsilon(1e-7));
  }
}

TEST_CASE("integrator reports states exactly on the requested grid") {
  const auto cat = testutil::ladder({3.0, 6.0});
  const auto sys = lv2_system(cat, 0, 1);
  const std::vector<double> grid{0.0, 0.37, 1.0, 2.5};
  const auto sol = integrate(sys, {3.0, 0.001}, grid);
  CHECK(sol.times == grid);
  CHECK(sol.states.size() == 4);
  CHECK_THROWS_AS(integrate(sys, {1.0}, grid), Error);
  CHECK_THROWS_AS(integrate(sys, {3.0, 0.001}, {0.0, 1.0, 1.0}), Error);
}

TEST_CASE("declining components are clipped to exact zero") {
  const auto cat = testutil::ladder({3.0, 6.0});
  const auto sys = lv2_system(cat, 0, 1);
  std::vector<double> grid;
  for (int i = 0; i <= 30; ++i) grid.push_back(static_cast<double>(i));
  const auto sol = integrate(sys, {1e-12, 6.0}, grid);
  CHECK(sol.states.back()[0] == 0.0); // bitwise zero, not just small
  CHECK(sol.states.back()[1] == doctest::Approx(6.0).epsilon(1e-9));
  // The initial sub-tolerance density is clipped immediately as well.
  CHECK(sol.states.front()[0] == 0.0);
}

TEST_CASE("substitution pair fixed points: singular kernel is rejected") {
  const auto cat = testutil::ladder({3.0, 6.0}); // all-ones 2x2 kernel
  CHECK_THROWS_AS(fixed_points_lv(cat, 0, 1), Error);
  try {
    fixed_points_lv(cat, 0, 1);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateKernel);
  }
}

TEST_CASE("asymmetric kernel yields an inadmissible interior crossing") {
  TraitCatalog cat;
  cat.traits = {{"x", 3.0, 0.0, 1.0}, {"y", 6.0, 0.0, 1.0}};
  cat.alpha0 = {1.0, 1.0, 0.5, 1.0};
  cat.migration.assign(4, 0.0);
  const auto rep = fixed_points_lv(cat, 0, 1);
  REQUIRE(rep.points.size() == 4);
  CHECK(rep.labels == std::vector<std::string>{"extinction", "x-alone",
                                               "y-alone", "interior"});
  CHECK(rep.points[1][0] == doctest::Approx(3.0));
  CHECK(rep.points[2][1] == doctest::Approx(6.0));
  CHECK(rep.has_interior);
  CHECK_FALSE(rep.interior_admissible);
  CHECK(rep.points[3][0] == doctest::Approx(-6.0).epsilon(1e-12));
  CHECK(rep.points[3][1] == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("weak cross competition yields an admissible interior point") {
  TraitCatalog cat;
  cat.traits = {{"x", 3.0, 0.0, 1.0}, {"y", 6.0, 0.0, 1.0}};
  cat.alpha0 = {1.0, 0.2, 0.2, 1.0};
  cat.migration.assign(4, 0.0);
  const auto rep = fixed_points_lv(cat, 0, 1);
  CHECK(rep.interior_admissible);
  CHECK(rep.points[3][0] == doctest::Approx(1.875).epsilon(1e-12));
  CHECK(rep.points[3][1] == doctest::Approx(5.625).epsilon(1e-12));
}

TEST_CASE("stability classification matches the substitution picture") {
  const auto cat = testutil::ladder({3.0, 6.0});
  const auto sys = lv2_system(cat, 0, 1);

  const auto winner = classify_stability(sys, {0.0, 6.0});
  CHECK(winner.classification == Stability::Stable);
  REQUIRE(winner.eigenvalues.size() == 2);

  const auto loser = classify_stability(sys, {3.0, 0.0});
  CHECK(loser.classification == Stability::Unstable);

  const auto extinct = classify_stability(sys, {0.0, 0.0});
  CHECK(extinct.classification == Stability::Unstable);

  CHECK_THROWS_AS(classify_stability(sys, {1.0, 1.0}), Error);
  try {
    classify_stability(sys, {1.0, 1.0});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotAFixedPoint);
  }
}

TEST_CASE("single trait stability uses the closed-form eigenvalue") {
  const auto cat = testutil::ladder({3.0});
  const auto sys = logistic_system(cat, 0);
  const auto at_mass = classify_stability(sys, {3.0});
  CHECK(at_mass.classification == Stability::Stable);
  CHECK(at_mass.eigenvalues[0].real() == doctest::Approx(-3.0));
  const auto at_zero = classify_stability(sys, {0.0});
  CHECK(at_zero.classification == Stability::Unstable);
  CHECK(at_zero.eigenvalues[0].real() == doctest::Approx(3.0));
}

TEST_CASE("zero net growth classifies as marginal") {
  auto cat = testutil::ladder({3.0});
  cat.traits[0].d = 3.0;
  const auto sys = logistic_system(cat, 0);
  const auto rep = classify_stability(sys, {0.0});
  CHECK(rep.classification == Stability::Marginal);
}

TEST_CASE("five trait ladder stability goes through the dense solver") {
  const auto cat = testutil::ladder({3.0, 6.0, 8.0, 10.0, 12.0});
  const auto sys = nearest_neighbor_system(cat, 0.0, false);
  // The alternating configuration (3, 0, 8, 0, 12) is the attractor of the
  // migration-free system: each absent trait sits between two present
  // neighbors whose combined pressure outweighs its growth.
  const auto rep = classify_stability(sys, {3.0, 0.0, 8.0, 0.0, 12.0});
  CHECK(rep.eigenvalues.size() == 5);
  CHECK(rep.classification == Stability::Stable);
  for (const auto& ev : rep.eigenvalues) CHECK(ev.real() < 0.0);
}
