#pragma once

#include <cstddef>

namespace devtree {

// Every tolerance used by sign tests, eigenvalue classification and
// fixed-point identification lives here so the knobs sit in one place.
struct NumericPolicy {
  double sign_tol = 1e-12;  // |f| <= sign_tol counts as a zero fitness sign
  double eig_tol = 1e-9;    // |Re(lambda)| <= eig_tol counts as marginal
  double fixed_point_tol = 1e-9;  // max|rhs| at a claimed equilibrium
  double denom_tol = 1e-12;       // 2x2 determinant treated as singular below

  // Adaptive integrator defaults.
  double ode_rel_tol = 1e-8;
  double ode_abs_tol = 1e-10;
};

inline const NumericPolicy& default_policy() {
  static const NumericPolicy p{};
  return p;
}

} // namespace devtree
