#pragma once

#include <stdexcept>
#include <string>

namespace birchmax {

/// Argument outside an operation's precondition.
class contract_error : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Mathematically undefined input (non-prime modulus, inverse of zero, ...).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Work refused because it exceeds a configured memory or time cap.
class resource_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cache file missing, truncated, or carrying the wrong magic/version/key.
class cache_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical procedure failed to reach its tolerance.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate_(estimate), error_(error) {}
  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }

 private:
  double estimate_;
  double error_;
};

/// A value whose logarithm is finite but which does not fit a double.
class overflow_error : public std::overflow_error {
 public:
  overflow_error(const std::string& what, double log_value)
      : std::overflow_error(what), log_value_(log_value) {}
  double log_value() const noexcept { return log_value_; }

 private:
  double log_value_;
};

}  // namespace birchmax
