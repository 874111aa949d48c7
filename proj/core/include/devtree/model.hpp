#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "devtree/errors.hpp"
#include "devtree/numeric.hpp"

namespace devtree {

// One competing alternative. b is the clonal birth rate, d the natural
// death rate, mu the per-individual mutation weight that multiplies the
// global mutation scale sigma.
struct TraitParams {
  std::string id;
  double b = 0.0;
  double d = 0.0;
  double mu = 1.0;
};

enum class MutantPolicyKind {
  FitterThanAll,   // next undiscovered trait above everything discovered
  NextInCatalog,   // walks the declaration order
  ExplicitSequence // scripted arrival order of catalog indices
};

struct MutantPolicy {
  MutantPolicyKind kind = MutantPolicyKind::FitterThanAll;
  std::vector<int> sequence; // used by ExplicitSequence
};

// Finite trait space with dense interaction kernels, indexed in declaration
// order. alpha0(x, y) is the competition pressure an individual of x feels
// per unit density of y (diagonal included). migration(x, y) is the
// per-capita migration weight from x to y, rescaled by epsilon at runtime.
// Both are expected to vanish beyond nearest neighbors in the fitness
// order; that is enforced by validate_assumptions, not by construction.
struct TraitCatalog {
  std::vector<TraitParams> traits;
  std::vector<double> alpha0;     // row-major (size() x size())
  std::vector<double> migration;  // row-major (size() x size())
  // Optional override for the substitution-sequence jump weight w(x, y).
  // Empty means "use the migration kernel", which is the default reading.
  std::vector<double> tss_weight;
  MutantPolicy mutant_policy;

  std::size_t size() const { return traits.size(); }

  double alpha(int x, int y) const { return alpha0[idx(x, y)]; }
  double mig(int x, int y) const { return migration[idx(x, y)]; }
  double w(int x, int y) const {
    return tss_weight.empty() ? migration[idx(x, y)] : tss_weight[idx(x, y)];
  }

  int find_trait(const std::string& id) const;

private:
  std::size_t idx(int x, int y) const {
    return static_cast<std::size_t>(x) * size() + static_cast<std::size_t>(y);
  }
};

// K is the system size; individual competition is alpha0/K. epsilon scales
// migration, sigma scales mutation.
struct ScalingRegime {
  double K = 1.0;
  double epsilon = 1.0;
  double sigma = 0.0;

  // eps = K^-a, sigma = K^-c.
  static ScalingRegime from_exponents(double K, double a, double c);
};

// Density per declared trait (mass relative to K).
using Configuration = std::vector<double>;

// Equilibrium density (b - d) / alpha0(x, x) of trait x alone.
double equilibrium_mass(const TraitCatalog& cat, int x,
                        const NumericPolicy& pol = default_policy());

// Invasion fitness of x against a resident y at equilibrium:
// f(x, y) = b(x) - d(x) - alpha0(x, y) * nbar(y). f(x, x) = 0.
double invasion_fitness(const TraitCatalog& cat, int x, int y,
                        const NumericPolicy& pol = default_policy());

// Catalog indices sorted from least to most fit: consecutive entries (x, y)
// satisfy f(x, y) < 0 < f(y, x). Throws OrderViolation (naming the first
// offending pair) when no unique chain exists.
std::vector<int> fitness_order(const TraitCatalog& cat,
                               const NumericPolicy& pol = default_policy());

struct AssumptionCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks; // rates-valid, non-coexistence,
                                       // order-consistency, kernel-support
  std::vector<std::string> warnings;   // growth-bound (B3 analogue) and such
  std::vector<int> order;              // filled when order-consistency passed
  bool passed() const;
  std::string to_text() const;
};

// Pure function of the catalog: same input, same report.
// Hard checks gate simulation; warnings do not.
AssumptionReport validate_assumptions(const TraitCatalog& cat,
                                      const NumericPolicy& pol = default_policy());

} // namespace devtree
