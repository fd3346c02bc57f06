#pragma once

#include <stdexcept>
#include <string>

namespace lattice {

// Invalid or inconsistent user configuration (bad keys, (H1) violation, unknown selectors).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation called outside its domain (window mismatch, empty cloud, M beyond window).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Derived constants came out non-positive even though (H1) passed.
class InconsistentParameters : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(double time)
      : std::runtime_error("non-finite state after step ending at t=" + std::to_string(time)),
        time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

// A shifted symbol has no family sample within the sampling resolution.
class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lattice
