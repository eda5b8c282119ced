#pragma once

#include <stdexcept>
#include <string>

namespace bogo {

/// Argument outside the mathematical domain of an operation (k <= 0, omega <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Physically valid input that the linearized model does not cover, e.g. U <= 0.
class UnsupportedRegime : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The adaptive integrator could not reach the requested time.
class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::string& what, double last_good_time)
      : std::runtime_error(what), last_good_time_(last_good_time) {}

  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

/// Malformed or inconsistent scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bogo
