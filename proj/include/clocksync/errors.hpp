#pragma once

#include <stdexcept>
#include <string>

namespace clocksync {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or violated preconditions on user input. CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Physics or numerics failure (unstable drift, singular system, undefined
// statistic). CLI exit code 3.
class PhysicsError : public Error {
 public:
  using Error::Error;
};

class StabilityError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class NumericalError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

// CLI exit code 4.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace clocksync
