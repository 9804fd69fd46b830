#pragma once

#include <stdexcept>
#include <string>

namespace apjac {

/// Input rejected: a precondition or a domain invariant does not hold.
/// The CLI maps this family to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation could not be carried out to the required accuracy.
/// The CLI maps this family to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class RootFindingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NearSpectrum : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonRealRoots : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NegativeWeight : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NodeCollision : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateCritical : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyOverlap : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class WindowTooShort : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientWindow : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DigitOverflowBeyondPrefix : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace apjac
