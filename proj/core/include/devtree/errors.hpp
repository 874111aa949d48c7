#pragma once

#include <stdexcept>
#include <string>

namespace devtree {

enum class ErrorKind {
  InvalidArgument,   // bad inputs, malformed catalogs, out-of-range indices
  SingularModel,     // zero self-competition, n-bar undefined
  OrderViolation,    // fitness relation does not chain the catalog
  DegenerateKernel,  // singular 2x2 competition system, no interior point
  NotAFixedPoint,    // stability query at a non-equilibrium state
  Explosion,         // population cap exceeded or rates overflowed
  AbsorbingState,    // step() asked on a state with zero total rate
  Stiffness,         // adaptive integrator step underflow
  GridMismatch,      // comparison inputs on different grids or trait counts
  Parse,             // scenario or CSV parse failure
  Io,                // filesystem failure
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

} // namespace devtree
