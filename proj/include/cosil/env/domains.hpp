#pragma once

#include <map>
#include <memory>

#include "cosil/env/env.hpp"

namespace cosil::env {

/// Car on a line between two flags; only the blue flag in the middle tells
/// which side the green (goal) flag is on.
///
/// State (x, v, green side). Observation (x, v, indicator) where the
/// indicator is the green side within `indicator_radius` of the blue flag and
/// 0 elsewhere. v <- clip(v + 0.0015 a, +-0.07), x <- x + v.
class CarFlag final : public Environment {
 public:
  struct Geometry {
    double flag_position = 1.0;
    double blue_position = 0.0;
    double indicator_radius = 0.2;
    double position_limit = 1.1;
    double power = 0.0015;
    double max_speed = 0.07;
    /// Start |x| is drawn from [start_min, start_max] with a random sign.
    double start_min = 0.22;
    double start_max = 0.30;
  };

  explicit CarFlag(const EnvConfig& config);

  std::string name() const override { return "car-flag"; }
  ActionSpace action_space() const override { return ActionSpace::continuous(1, -1.0, 1.0); }
  std::size_t observation_dim() const override { return 3; }
  std::size_t state_dim() const override { return 3; }
  StepResult reset(std::uint64_t episode_seed) override;
  StepResult step(std::span<const double> action) override;
  Action expert_action(std::span<const double> state) const override;
  std::vector<double> reward_set() const override { return {-0.01, 1.0, -1.0}; }

  const Geometry& geometry() const { return geo_; }
  /// Places the car directly (tests and oracles).
  StepResult set_state(double x, double v, double green_side);

 private:
  StepResult observe(double reward, bool done, bool truncated, bool success) const;

  Geometry geo_;
  double x_ = 0.0, v_ = 0.0, side_ = 1.0;
};

/// A finger moving along [0,1] above two identical bumps. A compliant finger
/// slides over a bump and deflects; a stiff finger pushes it.
///
/// Actions: 0 left/compliant, 1 right/compliant, 2 left/stiff, 3 right/stiff.
/// State (finger, left bump, right bump, left start, right start).
/// Observation (finger, deflection) with deflection = overlap / radius.
class Bumps1D final : public Environment {
 public:
  struct Geometry {
    double step = 0.02;
    double radius = 0.04;
    double threshold = 0.05;
  };

  explicit Bumps1D(const EnvConfig& config);

  std::string name() const override { return "bumps-1d"; }
  ActionSpace action_space() const override { return ActionSpace::discrete(4); }
  std::size_t observation_dim() const override { return 2; }
  std::size_t state_dim() const override { return 5; }
  StepResult reset(std::uint64_t episode_seed) override;
  StepResult step(std::span<const double> action) override;
  Action expert_action(std::span<const double> state) const override;
  std::vector<double> reward_set() const override { return {0.0, 1.0}; }

  const Geometry& geometry() const { return geo_; }
  StepResult set_state(double finger, double left, double right);

 private:
  double deflection() const;
  StepResult observe(double reward, bool done, bool truncated, bool success) const;

  Geometry geo_;
  double finger_ = 0.0, left_ = 0.0, right_ = 0.0, left0_ = 0.0, right0_ = 0.0;
};

/// A finger on a 10x10 grid above a small (1 cell) and a big (3x3) bump.
/// Contact deflection is 0.5 on the small bump and 1.0 on the big one.
///
/// Actions: 0 left, 1 right, 2 up, 3 down, 4 stay. Any Stay ends the episode.
/// The penalty variant gives -100 for staying on the big bump before the
/// small one was visited and appends the visited flag to the observation.
/// State (fx, fy, big x, big y, small x, small y, visited).
class Bumps2D final : public Environment {
 public:
  enum Move { kLeft = 0, kRight, kUp, kDown, kStay };

  explicit Bumps2D(const EnvConfig& config);

  std::string name() const override { return "bumps-2d"; }
  ActionSpace action_space() const override { return ActionSpace::discrete(5); }
  std::size_t observation_dim() const override { return penalty_ ? 4 : 3; }
  std::size_t state_dim() const override { return 7; }
  StepResult reset(std::uint64_t episode_seed) override;
  StepResult step(std::span<const double> action) override;
  Action expert_action(std::span<const double> state) const override;
  std::vector<double> reward_set() const override;

  bool penalty_variant() const { return penalty_; }
  int size() const { return size_; }
  StepResult set_state(int fx, int fy, int bx, int by, int sx, int sy, bool visited);

  static bool on_big(int x, int y, int bx, int by) { return std::abs(x - bx) <= 1 && std::abs(y - by) <= 1; }
  static bool on_small(int x, int y, int sx, int sy) { return x == sx && y == sy; }

 private:
  StepResult observe(double reward, bool done, bool truncated, bool success) const;

  bool penalty_ = false;
  int size_ = 10;
  int fx_ = 0, fy_ = 0, bx_ = 0, by_ = 0, sx_ = 0, sy_ = 0;
  bool visited_ = false;
};

/// Two-state chain with o = s, for sanity checks against value iteration.
///
/// In state 0: action 0 stays (+0.1), action 1 moves to state 1 (0).
/// In state 1: action 0 moves to state 0 (0), action 1 stays (+1).
/// Episodes never terminate; the cap truncates them.
class Chain final : public Environment {
 public:
  explicit Chain(const EnvConfig& config);

  std::string name() const override { return "chain"; }
  ActionSpace action_space() const override { return ActionSpace::discrete(2); }
  std::size_t observation_dim() const override { return 2; }
  std::size_t state_dim() const override { return 1; }
  StepResult reset(std::uint64_t episode_seed) override;
  StepResult step(std::span<const double> action) override;
  Action expert_action(std::span<const double> state) const override;
  std::vector<double> reward_set() const override { return {0.0, 0.1, 1.0}; }

  /// (next state, reward) for a state/action pair.
  static std::pair<int, double> transition(int state, int action);

 private:
  StepResult observe(double reward, bool done, bool truncated) const;
  int state_ = 0;
};

}  // namespace cosil::env
