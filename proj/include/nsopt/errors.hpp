#pragma once

#include <stdexcept>
#include <string>

namespace nsopt {

/// Input dimensions do not match the problem description.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A scalar or structural parameter is outside its admissible range.
struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The requested (regularizer, constraint set) combination has no
/// supported exact subproblem solver.
struct UnsupportedPairing : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A structural assumption of the chosen algorithm is violated
/// (rank condition, missing block solver, infeasible start, ...).
struct AssumptionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nsopt
