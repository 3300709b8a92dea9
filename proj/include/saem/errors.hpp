#pragma once

#include <stdexcept>
#include <string>

namespace saem {

// Error taxonomy. The C API maps each class to a status code, so new error
// kinds should subclass one of these rather than std::runtime_error directly.

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// A model was asked for an optional capability it does not provide
// (exact posterior, exact sampler, closed-form marginal, ...).
class CapabilityError : public std::runtime_error {
 public:
  explicit CapabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a chain or the SA recursion leaves the finite/bounded region.
// Carries the step (or iteration) index at which the blow-up was detected.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& msg, long step)
      : std::runtime_error(msg + " (step " + std::to_string(step) + ")"),
        step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

}  // namespace saem
