#include "cosil/env/minigrid.hpp"

#include <algorithm>
#include <deque>

#include "cosil/errors.hpp"

namespace cosil::env {
namespace {

constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};
constexpr Cell kWallCell{Object::kWall, Color::kGrey};

}  // namespace

GridMap::GridMap(int width, int height) : width_(width), height_(height), cells_(std::size_t(width) * height) {
  if (width <= 0 || height <= 0) throw ConfigError("grid dimensions must be positive");
}

Cell GridMap::at(int x, int y) const {
  if (!inside(x, y)) return kWallCell;
  return cells_[std::size_t(y) * width_ + x];
}

void GridMap::set(int x, int y, Cell cell) {
  if (!inside(x, y)) throw UsageError("grid cell out of range");
  cells_[std::size_t(y) * width_ + x] = cell;
}

void GridMap::wall_rect() {
  for (int x = 0; x < width_; ++x) {
    set(x, 0, kWallCell);
    set(x, height_ - 1, kWallCell);
  }
  for (int y = 0; y < height_; ++y) {
    set(0, y, kWallCell);
    set(width_ - 1, y, kWallCell);
  }
}

std::pair<int, int> view_to_world(Pose pose, int vx, int vy) {
  const int f = pose.dir, r = (pose.dir + 1) % 4;
  const int ahead = kViewSize - 1 - vy, side = vx - kViewSize / 2;
  return {pose.x + kDx[f] * ahead + kDx[r] * side, pose.y + kDy[f] * ahead + kDy[r] * side};
}

std::array<bool, kViewSize * kViewSize> visibility(const GridMap& grid, Pose pose) {
  // Row-by-row sweep away from the agent: light spreads sideways and forward
  // from every visible cell that is not a wall.
  std::array<bool, kViewSize * kViewSize> mask{};
  auto idx = [](int vx, int vy) { return vy * kViewSize + vx; };
  auto see_behind = [&](int vx, int vy) {
    const auto [wx, wy] = view_to_world(pose, vx, vy);
    return grid.at(wx, wy).transparent();
  };
  mask[idx(kViewSize / 2, kViewSize - 1)] = true;
  for (int j = kViewSize - 1; j >= 0; --j) {
    for (int i = 0; i < kViewSize - 1; ++i) {
      if (!mask[idx(i, j)] || !see_behind(i, j)) continue;
      mask[idx(i + 1, j)] = true;
      if (j > 0) {
        mask[idx(i + 1, j - 1)] = true;
        mask[idx(i, j - 1)] = true;
      }
    }
    for (int i = kViewSize - 1; i > 0; --i) {
      if (!mask[idx(i, j)] || !see_behind(i, j)) continue;
      mask[idx(i - 1, j)] = true;
      if (j > 0) {
        mask[idx(i - 1, j - 1)] = true;
        mask[idx(i, j - 1)] = true;
      }
    }
  }
  return mask;
}

std::vector<double> egocentric_view(const GridMap& grid, Pose pose) {
  const auto mask = visibility(grid, pose);
  std::vector<double> out(kViewWidth, 0.0);
  for (int vy = 0; vy < kViewSize; ++vy) {
    for (int vx = 0; vx < kViewSize; ++vx) {
      const int k = vy * kViewSize + vx;
      if (!mask[k]) continue;
      Cell cell{Object::kEmpty, Color::kRed};
      if (!(vx == kViewSize / 2 && vy == kViewSize - 1)) {
        const auto [wx, wy] = view_to_world(pose, vx, vy);
        cell = grid.at(wx, wy);
      }
      double* o = out.data() + 3 * k;
      o[0] = static_cast<double>(cell.object) / 10.0;
      o[1] = cell.object == Object::kEmpty ? 0.0 : static_cast<double>(cell.color) / 5.0;
      o[2] = cell.passable() ? 1.0 : 0.0;
    }
  }
  return out;
}

Pose apply_grid_action(const GridMap& grid, Pose pose, int action) {
  switch (action) {
    case kTurnLeft:
      pose.dir = (pose.dir + 3) % 4;
      break;
    case kTurnRight:
      pose.dir = (pose.dir + 1) % 4;
      break;
    case kForward: {
      const int nx = pose.x + kDx[pose.dir], ny = pose.y + kDy[pose.dir];
      if (grid.at(nx, ny).passable()) {
        pose.x = nx;
        pose.y = ny;
      }
      break;
    }
    default:
      throw UsageError("grid action must be 0, 1 or 2");
  }
  return pose;
}

DistanceField::DistanceField(const GridMap& grid, const std::vector<std::pair<int, int>>& goals,
                             const std::vector<std::pair<int, int>>& blocked)
    : width_(grid.width()), height_(grid.height()), dist_(std::size_t(width_) * height_ * 4, -1),
      blocked_(std::size_t(width_) * height_, false) {
  for (auto [x, y] : blocked) {
    if (grid.inside(x, y)) blocked_[std::size_t(y) * width_ + x] = true;
  }
  auto standable = [&](int x, int y) {
    return grid.inside(x, y) && grid.at(x, y).passable() && !blocked_[std::size_t(y) * width_ + x];
  };
  auto key = [&](int x, int y, int d) { return (std::size_t(y) * width_ + x) * 4 + d; };
  std::deque<Pose> queue;
  for (auto [x, y] : goals) {
    if (!standable(x, y)) continue;
    for (int d = 0; d < 4; ++d) {
      if (dist_[key(x, y, d)] < 0) {
        dist_[key(x, y, d)] = 0;
        queue.push_back({x, y, d});
      }
    }
  }
  while (!queue.empty()) {
    const Pose p = queue.front();
    queue.pop_front();
    const int next = dist_[key(p.x, p.y, p.dir)] + 1;
    const Pose preds[3] = {{p.x, p.y, (p.dir + 1) % 4},
                           {p.x, p.y, (p.dir + 3) % 4},
                           {p.x - kDx[p.dir], p.y - kDy[p.dir], p.dir}};
    for (const Pose& q : preds) {
      if (!standable(q.x, q.y)) continue;
      int& slot = dist_[key(q.x, q.y, q.dir)];
      if (slot < 0) {
        slot = next;
        queue.push_back(q);
      }
    }
  }
}

int DistanceField::at(Pose pose) const {
  if (pose.x < 0 || pose.y < 0 || pose.x >= width_ || pose.y >= height_) return -1;
  return dist_[(std::size_t(pose.y) * width_ + pose.x) * 4 + pose.dir];
}

int DistanceField::best_action(const GridMap& grid, Pose pose) const {
  const int here = at(pose);
  if (here <= 0) return kForward;
  for (int a : {kForward, kTurnLeft, kTurnRight}) {
    if (at(apply_grid_action(grid, pose, a)) == here - 1) return a;
  }
  return kForward;
}

StepResult GridEnvironment::observe(double reward, bool done, bool truncated, bool success) const {
  StepResult r;
  r.observation = egocentric_view(*grid_, pose_);
  r.reward = reward;
  r.done = done;
  r.truncated = truncated;
  r.success = success;
  r.privileged_state = encode_state();
  return r;
}

StepResult GridEnvironment::step(std::span<const double> action) {
  const int a = checked_discrete_action(action, 3, name());
  pose_ = apply_grid_action(*grid_, pose_, a);
  const bool capped = advance_clock();
  const Outcome out = on_move();
  if (out.terminal) return observe(out.reward, true, false, out.success);
  return observe(out.reward, capped, capped, false);
}

Action GridEnvironment::expert_action(std::span<const double> state) const {
  if (state.size() != state_dim()) throw UsageError(name() + ": wrong privileged state width");
  std::vector<double> layout(state.begin() + 3, state.end());
  auto it = expert_cache_.find(layout);
  if (it == expert_cache_.end()) {
    if (expert_cache_.size() >= 4096) expert_cache_.clear();
    CachedField entry;
    entry.grid = layout_from_state(state);
    std::vector<std::pair<int, int>> goals, blocked;
    expert_targets(state, goals, blocked);
    entry.field = std::make_unique<DistanceField>(*entry.grid, goals, blocked);
    it = expert_cache_.emplace(std::move(layout), std::move(entry)).first;
  }
  const Pose pose{static_cast<int>(state[0]), static_cast<int>(state[1]), static_cast<int>(state[2])};
  return {static_cast<double>(it->second.field->best_action(*it->second.grid, pose))};
}

MemoryEnv::MemoryEnv(const EnvConfig& config) : GridEnvironment(resolve_max_steps(config, "minigrid-memory")) {
  size_ = static_cast<int>(config.get("size", 13));
  if (size_ < 7) throw ConfigError("minigrid-memory size must be at least 7");
  rng_.seed(config.seed);
}

std::unique_ptr<GridMap> MemoryEnv::build(int hallway_end, bool cue_ball, bool top_ball) const {
  auto g = std::make_unique<GridMap>(size_, size_);
  g->wall_rect();
  const int mid = size_ / 2, upper = mid - 2, lower = mid + 2;
  for (int i = 1; i < 5; ++i) {
    g->set(i, upper, kWallCell);
    g->set(i, lower, kWallCell);
  }
  g->set(4, upper + 1, kWallCell);
  g->set(4, lower - 1, kWallCell);
  for (int i = 5; i < hallway_end; ++i) {
    g->set(i, upper + 1, kWallCell);
    g->set(i, lower - 1, kWallCell);
  }
  for (int j = 0; j < size_; ++j) {
    if (j != mid) g->set(hallway_end, j, kWallCell);
    g->set(hallway_end + 2, j, kWallCell);
  }
  auto object = [](bool ball) { return Cell{ball ? Object::kBall : Object::kKey, Color::kGreen}; };
  g->set(1, mid - 1, object(cue_ball));
  g->set(hallway_end + 1, mid - 2, object(top_ball));
  g->set(hallway_end + 1, mid + 2, object(!top_ball));
  return g;
}

std::pair<int, int> MemoryEnv::success_cell() const {
  const int mid = size_ / 2;
  return {hallway_end_ + 1, cue_ball_ == top_ball_ ? mid - 1 : mid + 1};
}

std::pair<int, int> MemoryEnv::failure_cell() const {
  const int mid = size_ / 2;
  return {hallway_end_ + 1, cue_ball_ == top_ball_ ? mid + 1 : mid - 1};
}

StepResult MemoryEnv::reset(std::uint64_t episode_seed) {
  rng_.seed(episode_seed);
  hallway_end_ = std::uniform_int_distribution<int>(4, size_ - 3)(rng_);
  const int start_x = std::uniform_int_distribution<int>(1, hallway_end_)(rng_);
  cue_ball_ = std::uniform_int_distribution<int>(0, 1)(rng_) == 1;
  top_ball_ = std::uniform_int_distribution<int>(0, 1)(rng_) == 1;
  grid_ = build(hallway_end_, cue_ball_, top_ball_);
  pose_ = {start_x, size_ / 2, 0};
  steps_ = 0;
  return observe(0.0, false, false, false);
}

GridEnvironment::Outcome MemoryEnv::on_move() const {
  const std::pair<int, int> at{pose_.x, pose_.y};
  if (at == success_cell()) return {5.0, true, true};
  if (at == failure_cell()) return {-5.0, true, false};
  return {-0.05, false, false};
}

std::vector<double> MemoryEnv::encode_state() const {
  return {double(pose_.x), double(pose_.y), double(pose_.dir), double(hallway_end_), cue_ball_ ? 1.0 : 0.0,
          top_ball_ ? 1.0 : 0.0};
}

std::unique_ptr<GridMap> MemoryEnv::layout_from_state(std::span<const double> state) const {
  return build(static_cast<int>(state[3]), state[4] != 0.0, state[5] != 0.0);
}

void MemoryEnv::expert_targets(std::span<const double> state, std::vector<std::pair<int, int>>& goals,
                               std::vector<std::pair<int, int>>& blocked) const {
  const int mid = size_ / 2, x = static_cast<int>(state[3]) + 1;
  const bool top = (state[4] != 0.0) == (state[5] != 0.0);
  goals.push_back({x, top ? mid - 1 : mid + 1});
  blocked.push_back({x, top ? mid + 1 : mid - 1});
}

CrossingEnv::CrossingEnv(const EnvConfig& config) : GridEnvironment(resolve_max_steps(config, "minigrid-crossing")) {
  size_ = static_cast<int>(config.get("size", 15));
  crossings_ = static_cast<int>(config.get("crossings", 4));
  if (size_ < 5 || size_ % 2 == 0) throw ConfigError("minigrid-crossing size must be odd and at least 5");
  const int lines = 2 * static_cast<int>((size_ - 4 + 1) / 2);
  if (crossings_ < 1 || crossings_ > lines) {
    throw ConfigError("minigrid-crossing crossings must be in [1, " + std::to_string(lines) + "]");
  }
  rng_.seed(config.seed);
}

StepResult CrossingEnv::reset(std::uint64_t episode_seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    rng_.seed(episode_seed + attempt);
    std::vector<std::pair<int, int>> rivers;
    for (int p = 2; p < size_ - 2; p += 2) rivers.push_back({0, p});
    for (int p = 2; p < size_ - 2; p += 2) rivers.push_back({1, p});
    std::shuffle(rivers.begin(), rivers.end(), rng_);
    rivers.resize(static_cast<std::size_t>(crossings_));
    std::sort(rivers.begin(), rivers.end());
    walls_ = rivers;

    std::vector<int> vertical{0}, horizontal{0};
    for (auto [kind, pos] : rivers) (kind == 0 ? vertical : horizontal).push_back(pos);
    const std::size_t nv = vertical.size() - 1, nh = horizontal.size() - 1;
    vertical.push_back(size_ - 1);
    horizontal.push_back(size_ - 1);

    // Crossing a vertical wall moves one room east, a horizontal one south.
    std::vector<int> path(nv, 0);
    path.insert(path.end(), nh, 1);
    std::shuffle(path.begin(), path.end(), rng_);
    gaps_.clear();
    std::size_t room_i = 0, room_j = 0;
    for (int kind : path) {
      if (kind == 0) {
        const int y = std::uniform_int_distribution<int>(horizontal[room_j] + 1, horizontal[room_j + 1] - 1)(rng_);
        gaps_.push_back({vertical[room_i + 1], y});
        ++room_i;
      } else {
        const int x = std::uniform_int_distribution<int>(vertical[room_i] + 1, vertical[room_i + 1] - 1)(rng_);
        gaps_.push_back({x, horizontal[room_j + 1]});
        ++room_j;
      }
    }
    pose_ = {1, 1, 0};
    grid_ = layout_from_state(encode_state());
    const DistanceField field(*grid_, {goal_cell()});
    if (field.at(pose_) >= 0) break;
    if (attempt > 1000) throw ConfigError("minigrid-crossing: no solvable layout found");
  }
  steps_ = 0;
  return observe(0.0, false, false, false);
}

GridEnvironment::Outcome CrossingEnv::on_move() const {
  if (std::pair{pose_.x, pose_.y} == goal_cell()) return {1.0, true, true};
  return {0.0, false, false};
}

std::vector<double> CrossingEnv::encode_state() const {
  std::vector<double> s{double(pose_.x), double(pose_.y), double(pose_.dir)};
  for (auto [kind, pos] : walls_) {
    s.push_back(kind);
    s.push_back(pos);
  }
  for (auto [x, y] : gaps_) {
    s.push_back(x);
    s.push_back(y);
  }
  return s;
}

std::unique_ptr<GridMap> CrossingEnv::layout_from_state(std::span<const double> state) const {
  auto g = std::make_unique<GridMap>(size_, size_);
  g->wall_rect();
  const std::size_t k = static_cast<std::size_t>(crossings_);
  for (std::size_t i = 0; i < k; ++i) {
    const int kind = static_cast<int>(state[3 + 2 * i]), pos = static_cast<int>(state[4 + 2 * i]);
    for (int t = 1; t < size_ - 1; ++t) {
      if (kind == 0) g->set(pos, t, kWallCell);
      else g->set(t, pos, kWallCell);
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    g->set(static_cast<int>(state[3 + 2 * k + 2 * i]), static_cast<int>(state[4 + 2 * k + 2 * i]), Cell{});
  }
  g->set(size_ - 2, size_ - 2, Cell{Object::kGoal, Color::kGreen});
  return g;
}

void CrossingEnv::expert_targets(std::span<const double>, std::vector<std::pair<int, int>>& goals,
                                 std::vector<std::pair<int, int>>&) const {
  goals.push_back(goal_cell());
}

}  // namespace cosil::env
