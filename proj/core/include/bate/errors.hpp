#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace bate {

/// Invalid configuration, schema violation, or precondition failure on inputs.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure at runtime (non-finite state, singular camera, guidance
/// singularity, filter blow-up).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Window too short for the requested analysis (needs at least n+2 samples).
class InsufficientObservationsError : public std::invalid_argument {
 public:
  InsufficientObservationsError(const std::string& what, int required, int got)
      : std::invalid_argument(what), required_samples(required), got_samples(got) {}
  int required_samples;
  int got_samples;
};

/// Rank-deficient stacked system; carries the offending null direction.
class UnobservableError : public std::runtime_error {
 public:
  UnobservableError(const std::string& what, Eigen::VectorXd direction)
      : std::runtime_error(what), null_direction(std::move(direction)) {}
  Eigen::VectorXd null_direction;
};

}  // namespace bate
