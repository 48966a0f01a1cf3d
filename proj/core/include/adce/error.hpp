#pragma once

#include <stdexcept>
#include <string>

namespace adce {

// Failure categories. The CLI maps each one onto a distinct exit code.
enum class ErrorKind { InvalidArgument, Config, RegimeViolation, NumericalFailure };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// A regime-specific formula was requested outside its validity domain.
/// `ratio` carries the failing figure of merit (NaN when not applicable).
struct RegimeViolation : Error {
  RegimeViolation(const std::string& what, double ratio_value)
      : Error(ErrorKind::RegimeViolation, what), ratio(ratio_value) {}
  double ratio;
};

struct NumericalFailure : Error {
  explicit NumericalFailure(const std::string& what) : Error(ErrorKind::NumericalFailure, what) {}
};

}  // namespace adce
