#pragma once

#include <stdexcept>
#include <string>

namespace qjump {

// Exit-code mapping used by the CLI: ValidationError (and subclasses) -> 2,
// IoError -> 1, reported fit non-convergence -> 3.

class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Rate matrix has no unique stationary state.
class DegenerateDynamicsError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

// Fewer complete dwells than the estimator needs.
class InsufficientDataError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

// Fit input carries no resolvable structure.
class FlatDataError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

// Sampled grid too coarse for the requested operation.
class ResolutionError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

} // namespace qjump
