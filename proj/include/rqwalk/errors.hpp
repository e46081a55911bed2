#pragma once

#include <stdexcept>
#include <string>

namespace rqwalk {

// Bad user-facing input: malformed config, out-of-range parameters, labels
// outside a region.  CLI maps this family to exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A numerical routine could not meet its accuracy contract.  CLI maps this
// family to exit code 3.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Phase field evaluated outside its sampled coverage.
struct CoverageError : ConfigError {
  using ConfigError::ConfigError;
};

}  // namespace rqwalk
