#pragma once

#include <stdexcept>
#include <string>

namespace cosil {

/// Invalid configuration: unknown names, bad shapes, out-of-range knobs.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An API was called in the wrong order (e.g. backward before forward).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed data handed to a container (episodes, snapshots, checkpoints).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A loss or network output became non-finite. Runs abort on this.
class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cosil
