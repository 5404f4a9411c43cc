#pragma once

#include <stdexcept>
#include <string>

namespace aimd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double partial_sum)
      : Error(what), partial_sum_(partial_sum) {}
  double partial_sum() const noexcept { return partial_sum_; }

 private:
  double partial_sum_;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double value, double error_estimate)
      : Error(what), value_(value), error_estimate_(error_estimate) {}
  double value() const noexcept { return value_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double value_;
  double error_estimate_;
};

class RootNotFoundError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace aimd
