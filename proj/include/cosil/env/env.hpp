#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace cosil::env {

/// Discrete(n) or continuous box of `dim` dimensions.
struct ActionSpace {
  enum class Kind { kDiscrete, kContinuous };

  Kind kind = Kind::kDiscrete;
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> low, high;

  static ActionSpace discrete(std::size_t n);
  static ActionSpace continuous(std::size_t dim, double low, double high);

  bool is_discrete() const { return kind == Kind::kDiscrete; }
  /// Doubles per stored action: 1 (index) for discrete, dim for continuous.
  std::size_t storage_width() const { return is_discrete() ? 1 : dim; }
  /// Width of the network encoding: one-hot for discrete, raw for continuous.
  std::size_t encoding_width() const { return is_discrete() ? n : dim; }
  bool contains(std::span<const double> action) const;
  /// Writes the network encoding of a stored action into `out`.
  void encode(std::span<const double> action, std::span<double> out) const;
};

using Action = std::vector<double>;

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  /// Episode over, by termination or by the step cap.
  bool done = false;
  /// Ended by the step cap rather than a terminal event.
  bool truncated = false;
  /// Task solved on this step (per-domain success definition).
  bool success = false;
  /// Full environment state. Training-time only.
  std::vector<double> privileged_state;
};

/// Environment name, base seed, step cap and domain-specific knobs.
struct EnvConfig {
  std::string name;
  std::uint64_t seed = 0;
  /// 0 selects the domain default.
  int max_steps = 0;
  std::map<std::string, double> params;

  double get(const std::string& key, double fallback) const;
};

/// Uniform stepping interface shared by every domain.
///
/// The privileged state is exposed so replay can store it for expert queries
/// at update time; nothing on an acting path may read it.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual ActionSpace action_space() const = 0;
  virtual std::size_t observation_dim() const = 0;
  virtual std::size_t state_dim() const = 0;
  int max_steps() const { return max_steps_; }

  virtual StepResult reset(std::uint64_t episode_seed) = 0;
  virtual StepResult step(std::span<const double> action) = 0;

  /// Deterministic state expert. Pure function of the privileged state.
  virtual Action expert_action(std::span<const double> state) const = 0;

  /// Every reward value the domain can emit.
  virtual std::vector<double> reward_set() const = 0;

  int steps_taken() const { return steps_; }
  /// Number of out-of-bounds actions that were clipped.
  std::uint64_t clipped_actions() const { return clipped_; }

 protected:
  explicit Environment(int max_steps) : max_steps_(max_steps) {}
  /// Bumps the step counter; returns true when the cap is reached.
  bool advance_clock() { return ++steps_ >= max_steps_; }

  int max_steps_;
  int steps_ = 0;
  std::uint64_t clipped_ = 0;
  std::mt19937_64 rng_;
};

/// Names: car-flag, bumps-1d, bumps-2d, minigrid-memory, minigrid-crossing, chain.
std::unique_ptr<Environment> make_environment(const EnvConfig& config);
std::vector<std::string> environment_names();

/// Validates a stored discrete action and returns its index.
int checked_discrete_action(std::span<const double> action, std::size_t n, const std::string& domain);

/// Domain step caps.
int default_max_steps(const std::string& name);
/// config.max_steps if set, otherwise the default cap for `domain`.
int resolve_max_steps(const EnvConfig& config, const std::string& domain);

}  // namespace cosil::env
