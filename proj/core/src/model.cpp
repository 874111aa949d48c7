#include "devtree/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace devtree {

namespace {

std::string trait_name(const TraitCatalog& cat, int x) {
  const auto& t = cat.traits[static_cast<std::size_t>(x)];
  if (!t.id.empty()) return t.id;
  return "#" + std::to_string(x);
}

std::string pair_name(const TraitCatalog& cat, int x, int y) {
  return "(" + trait_name(cat, x) + ", " + trait_name(cat, y) + ")";
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void check_index(const TraitCatalog& cat, int x) {
  if (x < 0 || static_cast<std::size_t>(x) >= cat.size())
    fail(ErrorKind::InvalidArgument,
         "trait index " + std::to_string(x) + " out of range");
}

void check_kernels_shape(const TraitCatalog& cat) {
  const std::size_t n = cat.size() * cat.size();
  if (cat.alpha0.size() != n || cat.migration.size() != n ||
      (!cat.tss_weight.empty() && cat.tss_weight.size() != n))
    fail(ErrorKind::InvalidArgument, "kernel matrices do not match trait count");
}

} // namespace

int TraitCatalog::find_trait(const std::string& id) const {
  for (std::size_t i = 0; i < traits.size(); ++i)
    if (traits[i].id == id) return static_cast<int>(i);
  return -1;
}

ScalingRegime ScalingRegime::from_exponents(double K, double a, double c) {
  if (K < 1.0) fail(ErrorKind::InvalidArgument, "K must be >= 1");
  ScalingRegime r;
  r.K = K;
  r.epsilon = std::pow(K, -a);
  r.sigma = std::pow(K, -c);
  return r;
}

double equilibrium_mass(const TraitCatalog& cat, int x,
                        const NumericPolicy& pol) {
  check_index(cat, x);
  check_kernels_shape(cat);
  const double a = cat.alpha(x, x);
  if (std::abs(a) <= pol.denom_tol)
    fail(ErrorKind::SingularModel,
         "zero self-competition for trait " + trait_name(cat, x));
  const auto& t = cat.traits[static_cast<std::size_t>(x)];
  return (t.b - t.d) / a;
}

double invasion_fitness(const TraitCatalog& cat, int x, int y,
                        const NumericPolicy& pol) {
  check_index(cat, x);
  check_index(cat, y);
  if (x == y) return 0.0;
  const auto& t = cat.traits[static_cast<std::size_t>(x)];
  return t.b - t.d - cat.alpha(x, y) * equilibrium_mass(cat, y, pol);
}

std::vector<int> fitness_order(const TraitCatalog& cat,
                               const NumericPolicy& pol) {
  check_kernels_shape(cat);
  const int n = static_cast<int>(cat.size());
  if (n == 0) fail(ErrorKind::InvalidArgument, "empty catalog");
  if (n == 1) return {0};

  // below[x][y] holds x-strictly-less-fit-than-y, decided per pair by the
  // signs of the two invasion fitnesses.
  std::vector<double> f(static_cast<std::size_t>(n) * n, 0.0);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (x != y)
        f[static_cast<std::size_t>(x) * n + y] = invasion_fitness(cat, x, y, pol);
  auto fit = [&](int x, int y) { return f[static_cast<std::size_t>(x) * n + y]; };
  auto below = [&](int x, int y) {
    return fit(x, y) < -pol.sign_tol && fit(y, x) > pol.sign_tol;
  };

  auto name_undecidable = [&](const std::vector<int>& pool) -> std::string {
    // Report the first pool pair with a nonnegative fitness product, the
    // signature of coexistence or bistability.
    for (std::size_t i = 0; i < pool.size(); ++i)
      for (std::size_t j = i + 1; j < pool.size(); ++j) {
        int x = pool[i], y = pool[j];
        if (fit(x, y) * fit(y, x) >= -pol.sign_tol * pol.sign_tol &&
            !below(x, y) && !below(y, x))
          return pair_name(cat, x, y) + " with f(x,y)=" + fmt(fit(x, y)) +
                 ", f(y,x)=" + fmt(fit(y, x));
      }
    return "unresolved trait pool";
  };

  std::vector<int> remaining(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) remaining[static_cast<std::size_t>(i)] = i;
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n));

  while (!remaining.empty()) {
    // The next entry must be the unique remaining trait with nothing below it.
    std::vector<int> minima;
    for (int x : remaining) {
      bool has_below = false;
      for (int y : remaining)
        if (y != x && below(y, x)) { has_below = true; break; }
      if (!has_below) minima.push_back(x);
    }
    if (minima.size() != 1)
      fail(ErrorKind::OrderViolation,
           "fitness relation does not chain the catalog: " +
               name_undecidable(minima.empty() ? remaining : minima));
    order.push_back(minima[0]);
    remaining.erase(std::find(remaining.begin(), remaining.end(), minima[0]));
  }

  // Consecutive entries must be genuinely comparable, not just unblocked.
  for (int i = 0; i + 1 < n; ++i)
    if (!below(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i) + 1]))
      fail(ErrorKind::OrderViolation,
           "fitness relation does not chain the catalog: consecutive pair " +
               pair_name(cat, order[static_cast<std::size_t>(i)],
                         order[static_cast<std::size_t>(i) + 1]) +
               " is not ordered");
  return order;
}

bool AssumptionReport::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string AssumptionReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.pass ? "pass" : "FAIL") << "  " << c.name;
    if (!c.detail.empty()) os << ": " << c.detail;
    os << "\n";
  }
  for (const auto& w : warnings) os << "warn  " << w << "\n";
  return os.str();
}

AssumptionReport validate_assumptions(const TraitCatalog& cat,
                                      const NumericPolicy& pol) {
  check_kernels_shape(cat);
  AssumptionReport rep;
  const int n = static_cast<int>(cat.size());

  // Rates valid: positive birth, nonnegative death and mutation weight,
  // positive net growth and self-competition so the equilibrium mass exists.
  {
    AssumptionCheck c{"rates-valid", true, ""};
    for (int x = 0; x < n && c.pass; ++x) {
      const auto& t = cat.traits[static_cast<std::size_t>(x)];
      if (!(t.b > 0.0)) {
        c.pass = false;
        c.detail = trait_name(cat, x) + " has b = " + fmt(t.b);
      } else if (t.d < 0.0 || t.mu < 0.0) {
        c.pass = false;
        c.detail = trait_name(cat, x) + " has negative d or mu";
      } else if (!(t.b - t.d > pol.sign_tol)) {
        c.pass = false;
        c.detail = trait_name(cat, x) + " has b - d = " + fmt(t.b - t.d);
      } else if (!(cat.alpha(x, x) > pol.denom_tol)) {
        c.pass = false;
        c.detail = trait_name(cat, x) + " has self-competition " +
                   fmt(cat.alpha(x, x));
      }
    }
    rep.checks.push_back(c);
  }
  const bool rates_ok = rep.checks.back().pass;

  // Non-coexistence: every interacting pair must have invasion fitnesses of
  // strictly opposite signs. Pairs with no kernel coupling in either
  // direction are deliberately incomparable and skipped.
  {
    AssumptionCheck c{"non-coexistence", rates_ok, rates_ok ? "" : "skipped"};
    if (rates_ok) {
      for (int x = 0; x < n && c.pass; ++x)
        for (int y = x + 1; y < n && c.pass; ++y) {
          if (cat.alpha(x, y) == 0.0 && cat.alpha(y, x) == 0.0) continue;
          const double fxy = invasion_fitness(cat, x, y, pol);
          const double fyx = invasion_fitness(cat, y, x, pol);
          const bool zero_ish =
              std::abs(fxy) <= pol.sign_tol || std::abs(fyx) <= pol.sign_tol;
          if (zero_ish || fxy * fyx > 0.0) {
            c.pass = false;
            c.detail = pair_name(cat, x, y) + " has f(x,y) = " + fmt(fxy) +
                       ", f(y,x) = " + fmt(fyx);
          }
        }
    }
    rep.checks.push_back(c);
  }

  // Order-consistency: the pairwise relation must chain the whole catalog.
  std::vector<int> order;
  {
    AssumptionCheck c{"order-consistency", false, ""};
    if (!rates_ok) {
      c.detail = "skipped";
    } else {
      try {
        order = fitness_order(cat, pol);
        c.pass = true;
      } catch (const Error& e) {
        c.detail = e.what();
      }
    }
    rep.checks.push_back(c);
    rep.order = order;
  }

  // Kernel support: nonnegative kernels, no self-migration, and both
  // kernels zero beyond nearest neighbors in the fitness order.
  {
    AssumptionCheck c{"kernel-support", !order.empty(), order.empty() ? "skipped" : ""};
    for (int x = 0; x < n && c.pass; ++x)
      for (int y = 0; y < n && c.pass; ++y) {
        if (cat.alpha(x, y) < 0.0 || cat.mig(x, y) < 0.0) {
          c.pass = false;
          c.detail = "negative kernel entry at " + pair_name(cat, x, y);
        } else if (x == y && cat.mig(x, y) != 0.0) {
          c.pass = false;
          c.detail = "self-migration at " + trait_name(cat, x);
        }
      }
    if (c.pass) {
      std::vector<int> pos(static_cast<std::size_t>(n), 0);
      for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i;
      for (int x = 0; x < n && c.pass; ++x)
        for (int y = 0; y < n && c.pass; ++y) {
          if (std::abs(pos[static_cast<std::size_t>(x)] - pos[static_cast<std::size_t>(y)]) <= 1) continue;
          if (cat.alpha(x, y) != 0.0 || cat.mig(x, y) != 0.0) {
            c.pass = false;
            c.detail = "non-neighbor coupling at " + pair_name(cat, x, y);
          }
        }
    }
    rep.checks.push_back(c);
  }

  // Growth bound, warning only: along each consecutive ordered triple
  // (x0, x1, x2) the comeback window is long enough when
  // 2 / (b(x2) - d(x2)) >= 1/f(x1,x0) + 1/f(x2,x1).
  if (!order.empty()) {
    for (int i = 0; i + 2 < n; ++i) {
      const int x0 = order[static_cast<std::size_t>(i)];
      const int x1 = order[static_cast<std::size_t>(i) + 1];
      const int x2 = order[static_cast<std::size_t>(i) + 2];
      const auto& t2 = cat.traits[static_cast<std::size_t>(x2)];
      const double f10 = invasion_fitness(cat, x1, x0, pol);
      const double f21 = invasion_fitness(cat, x2, x1, pol);
      if (f10 <= pol.sign_tol || f21 <= pol.sign_tol) continue; // order failed anyway
      const double lhs = 2.0 / (t2.b - t2.d);
      const double rhs = 1.0 / f10 + 1.0 / f21;
      if (lhs < rhs)
        rep.warnings.push_back(
            "growth-bound fails on triple (" + trait_name(cat, x0) + ", " +
            trait_name(cat, x1) + ", " + trait_name(cat, x2) + "): " +
            fmt(lhs) + " < " + fmt(rhs));
    }
  }

  return rep;
}

} // namespace devtree
