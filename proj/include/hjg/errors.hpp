#ifndef HJG_ERRORS_HPP
#define HJG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hjg {

/// Base of every library error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid, scheme or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain an operation accepts (point off the grid,
/// control outside its box, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A user evaluator produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Value function became non-finite or exceeded the blow-up threshold.
class NumericalBlowup : public Error {
 public:
  NumericalBlowup(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Malformed or truncated file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// No feasible start: the game value is infinite at the requested state.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace hjg

#endif  // HJG_ERRORS_HPP
