#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "cosil/env/env.hpp"

namespace cosil::env {

/// Object and colour ids follow the MiniGrid symbolic encoding.
enum class Object : std::uint8_t { kUnseen = 0, kEmpty = 1, kWall = 2, kKey = 5, kBall = 6, kGoal = 8 };
enum class Color : std::uint8_t { kRed = 0, kGreen = 1, kBlue = 2, kPurple = 3, kYellow = 4, kGrey = 5 };

struct Cell {
  Object object = Object::kEmpty;
  Color color = Color::kRed;

  bool passable() const { return object == Object::kEmpty || object == Object::kGoal; }
  bool transparent() const { return object != Object::kWall; }
};

class GridMap {
 public:
  GridMap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  /// Outside cells read as walls.
  Cell at(int x, int y) const;
  void set(int x, int y, Cell cell);
  void wall_rect();

 private:
  int width_, height_;
  std::vector<Cell> cells_;
};

/// Agent position and heading; dir 0 east, 1 south, 2 west, 3 north.
struct Pose {
  int x = 0, y = 0, dir = 0;
  bool operator==(const Pose&) const = default;
};

inline constexpr int kViewSize = 7;
inline constexpr std::size_t kViewWidth = kViewSize * kViewSize * 3;

/// Egocentric 7x7 view with occlusion, flattened row-major over (view y,
/// view x, channel). Channels: object id / 10, colour id / 5, open flag.
/// The agent sits at view (3, 6) facing view-up.
std::vector<double> egocentric_view(const GridMap& grid, Pose pose);
/// World cell shown at view coordinates (vx, vy).
std::pair<int, int> view_to_world(Pose pose, int vx, int vy);
/// Visibility mask over the 7x7 view after wall occlusion.
std::array<bool, kViewSize * kViewSize> visibility(const GridMap& grid, Pose pose);

/// Turn-left, turn-right, forward.
enum GridAction { kTurnLeft = 0, kTurnRight = 1, kForward = 2 };

/// Pose reached by an action; forward into a blocked cell leaves it unchanged.
Pose apply_grid_action(const GridMap& grid, Pose pose, int action);

/// Steps-to-go over poses for reaching any cell in `goals`; -1 where
/// unreachable. Cells in `blocked` are never entered.
class DistanceField {
 public:
  DistanceField(const GridMap& grid, const std::vector<std::pair<int, int>>& goals,
                const std::vector<std::pair<int, int>>& blocked = {});

  int at(Pose pose) const;
  /// First action (forward, left, right order) that reduces the distance.
  int best_action(const GridMap& grid, Pose pose) const;

 private:
  int width_, height_;
  std::vector<int> dist_;
  std::vector<bool> blocked_;
};

/// Shared turn/forward stepping and layout-keyed expert cache.
class GridEnvironment : public Environment {
 public:
  ActionSpace action_space() const override { return ActionSpace::discrete(3); }
  std::size_t observation_dim() const override { return kViewWidth; }
  StepResult step(std::span<const double> action) override;
  Action expert_action(std::span<const double> state) const override;

  const GridMap& grid() const { return *grid_; }
  Pose pose() const { return pose_; }
  /// Rebuilds the grid encoded in a privileged state.
  virtual std::unique_ptr<GridMap> layout_from_state(std::span<const double> state) const = 0;

 protected:
  explicit GridEnvironment(int max_steps) : Environment(max_steps) {}

  struct Outcome {
    double reward = 0.0;
    bool terminal = false;
    bool success = false;
  };
  virtual Outcome on_move() const = 0;
  virtual std::vector<double> encode_state() const = 0;
  /// Goals and blocked cells for the expert, from a privileged state.
  virtual void expert_targets(std::span<const double> state, std::vector<std::pair<int, int>>& goals,
                              std::vector<std::pair<int, int>>& blocked) const = 0;
  StepResult observe(double reward, bool done, bool truncated, bool success) const;

  std::unique_ptr<GridMap> grid_;
  Pose pose_;

 private:
  struct CachedField {
    std::unique_ptr<GridMap> grid;
    std::unique_ptr<DistanceField> field;
  };
  mutable std::map<std::vector<double>, CachedField> expert_cache_;
};

/// Memory task: remember the object in the start room, walk the hallway and
/// stand next to the matching object at the fork.
///
/// State (x, y, dir, hallway end, cue is ball, top object is ball).
/// Reward +5 at the matching object, -5 at the other, -0.05 per other step.
class MemoryEnv final : public GridEnvironment {
 public:
  explicit MemoryEnv(const EnvConfig& config);

  std::string name() const override { return "minigrid-memory"; }
  std::size_t state_dim() const override { return 6; }
  StepResult reset(std::uint64_t episode_seed) override;
  std::vector<double> reward_set() const override { return {-0.05, 5.0, -5.0}; }
  std::unique_ptr<GridMap> layout_from_state(std::span<const double> state) const override;

  int size() const { return size_; }
  std::pair<int, int> success_cell() const;
  std::pair<int, int> failure_cell() const;

 private:
  Outcome on_move() const override;
  std::vector<double> encode_state() const override;
  void expert_targets(std::span<const double> state, std::vector<std::pair<int, int>>& goals,
                      std::vector<std::pair<int, int>>& blocked) const override;
  std::unique_ptr<GridMap> build(int hallway_end, bool cue_ball, bool top_ball) const;

  int size_ = 13;
  int hallway_end_ = 0;
  bool cue_ball_ = false, top_ball_ = false;
};

/// Crossing task: walls with one gap each separate the agent at (1,1) from the
/// goal in the opposite corner.
///
/// State (x, y, dir, then per wall: kind (0 vertical, 1 horizontal),
/// position, then per gap: x, y). Reward 1 at the goal.
class CrossingEnv final : public GridEnvironment {
 public:
  explicit CrossingEnv(const EnvConfig& config);

  std::string name() const override { return "minigrid-crossing"; }
  std::size_t state_dim() const override { return 3 + 4 * static_cast<std::size_t>(crossings_); }
  StepResult reset(std::uint64_t episode_seed) override;
  std::vector<double> reward_set() const override { return {0.0, 1.0}; }
  std::unique_ptr<GridMap> layout_from_state(std::span<const double> state) const override;

  int size() const { return size_; }
  int crossings() const { return crossings_; }
  std::pair<int, int> goal_cell() const { return {size_ - 2, size_ - 2}; }

 private:
  Outcome on_move() const override;
  std::vector<double> encode_state() const override;
  void expert_targets(std::span<const double> state, std::vector<std::pair<int, int>>& goals,
                      std::vector<std::pair<int, int>>& blocked) const override;

  int size_ = 15;
  int crossings_ = 4;
  std::vector<std::pair<int, int>> walls_;  // (kind, position)
  std::vector<std::pair<int, int>> gaps_;
};

}  // namespace cosil::env
