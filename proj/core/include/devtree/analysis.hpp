#pragma once

#include <limits>
#include <string>
#include <vector>

#include "devtree/model.hpp"
#include "devtree/numeric.hpp"
#include "devtree/stochastic.hpp"
#include "devtree/deterministic.hpp"

namespace devtree {

// One separation-of-scales condition "lhs much-smaller-than rhs",
// operationalized as lhs/rhs <= margin. Informational checks carry an
// unspecified constant or are vacuous for the given regime and do not count
// toward passed().
struct ScalingCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool pass = false;
  bool informational = false;
  std::string note;
};

struct ScalingReport {
  std::vector<ScalingCheck> checks;
  double margin = 0.2;
  bool passed() const;
  std::string to_text() const;
};

// Validates the timescale ordering that makes the jump-process limits
// meaningful: 1 << K*eps << K for migration, exp(-C*K) << K*sigma << 1/ln(K)
// for mutation, and ln(1/eps) << 1/(K*sigma) << exp(C*K) across the two.
// The constant C is conventionally 1 here; both exp(C*K) sides are reported
// as informational. Checks involving a disabled mechanism (eps == 0 or
// sigma == 0) are reported but marked informational as well.
ScalingReport check_scaling(const ScalingRegime& regime, double margin = 0.2);

// Upper bound on the fixation timescale of an ordered ladder, in multiples
// of ln(1/eps). For a single triple (x0, x1, x2) this is
//   1/f(x1,x0) + 1/f(x2,x1) + c1/(b(x0) - d(x0)),
// with c1 = min(|f(x0,x1)|/f(x2,x1), 1); longer ladders sum the bound over
// consecutive triples and are flagged heuristic.
struct FixationEstimate {
  double time_units = 0.0; // multiples of ln(1/eps)
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<double> uphill_fitness; // f(x_{i+1}, x_i) along the ladder
  bool growth_bound_ok = true;
  bool heuristic = false; // composed over more than one triple
};

FixationEstimate predicted_fixation_time(const TraitCatalog& cat,
                                         const std::vector<int>& ladder,
                                         const NumericPolicy& pol = default_policy());

// Total-variation norm of the signed measure a - b: sum_x |a(x) - b(x)|.
// Configurations are finite measures, so this is unnormalized.
double total_variation_distance(const Configuration& a, const Configuration& b);

struct FixationMeasurement {
  bool reached = false;
  // NaN until reached; time_over_log stays NaN when eps is not in (0,1).
  double time = std::numeric_limits<double>::quiet_NaN();
  double time_over_log = std::numeric_limits<double>::quiet_NaN();
};

// First grid time after which the trajectory stays within TV distance delta
// of the target for the remainder of the horizon ("enters and stays").
FixationMeasurement measure_fixation_time(const Trajectory& traj,
                                          const Configuration& target,
                                          double delta,
                                          const ScalingRegime& regime);

struct OdeComparison {
  double sup_gap = 0.0;
  std::vector<double> gap; // per grid time, max over traits
};

// Sup-norm distance between an ensemble mean and a deterministic solution on
// the same grid.
OdeComparison compare_to_ode(const EnsembleStats& ensemble,
                             const Integration& ode);

} // namespace devtree
