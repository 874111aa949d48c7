#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "devtree/model.hpp"
#include "devtree/numeric.hpp"

namespace devtree {

enum class SystemKind { Logistic, LotkaVolterra2, NearestNeighborLV };

// Density dynamics in the large-population limit. All three kinds share the
// same rhs shape: per-capita growth b - d minus kernel-weighted crowding,
// plus (for the nearest-neighbor system) epsilon-scaled migration exchange
// with fitness-order neighbors. Kernel entries beyond nearest neighbors are
// masked off, matching the model the catalog is validated against.
struct OdeSystem {
  SystemKind kind = SystemKind::Logistic;
  TraitCatalog catalog;
  std::vector<int> members;   // catalog indices backing each component
  double epsilon = 0.0;       // migration scale, 0 disables the flux term
  std::vector<int> order_pos; // fitness-order position per member slot

  std::size_t dim() const { return members.size(); }
  void rhs(const double* n, double* out) const;
  std::vector<double> rhs(const std::vector<double>& n) const;
  // Row-major dim x dim analytic Jacobian of rhs.
  std::vector<double> jacobian(const std::vector<double>& n) const;
};

OdeSystem logistic_system(const TraitCatalog& cat, int x);
OdeSystem lv2_system(const TraitCatalog& cat, int x, int y);
// include_migration toggles the flux term; epsilon comes from the regime.
OdeSystem nearest_neighbor_system(const TraitCatalog& cat, double epsilon,
                                  bool include_migration,
                                  const NumericPolicy& pol = default_policy());

struct Integration {
  std::vector<double> times;
  std::vector<std::vector<double>> states; // one density vector per time
};

// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)). States are reported
// exactly at the requested grid times; components with |value| below the
// absolute tolerance are clipped to zero after each accepted step.
Integration integrate(const OdeSystem& sys, const std::vector<double>& y0,
                      const std::vector<double>& grid,
                      const NumericPolicy& pol = default_policy());

struct FixedPointReport {
  // Extinction, x-alone, y-alone, and (when the 2x2 system is nonsingular)
  // the interior crossing, in that order.
  std::vector<std::array<double, 2>> points;
  std::vector<std::string> labels;
  bool has_interior = false;
  bool interior_admissible = false; // both coordinates strictly positive
};

FixedPointReport fixed_points_lv(const TraitCatalog& cat, int x, int y,
                                 const NumericPolicy& pol = default_policy());

enum class Stability { Stable, Unstable, Marginal };

struct StabilityReport {
  std::vector<std::complex<double>> eigenvalues;
  std::vector<double> jacobian; // row-major
  Stability classification = Stability::Marginal;
};

// point must satisfy max|rhs| <= fixed_point_tol. Closed-form eigenvalues
// for one and two dimensions, dense solver above that.
StabilityReport classify_stability(const OdeSystem& sys,
                                   const std::vector<double>& point,
                                   const NumericPolicy& pol = default_policy());

} // namespace devtree
