#include <algorithm>
#include <cmath>

#include "cosil/env/domains.hpp"
#include "cosil/errors.hpp"

namespace cosil::env {

Bumps1D::Bumps1D(const EnvConfig& config) : Environment(resolve_max_steps(config, "bumps-1d")) {
  geo_.threshold = config.get("threshold", geo_.threshold);
  if (!(geo_.threshold > 0)) throw ConfigError("bumps-1d threshold must be positive");
  rng_.seed(config.seed);
}

double Bumps1D::deflection() const {
  const double overlap = std::max(geo_.radius - std::abs(finger_ - left_), geo_.radius - std::abs(finger_ - right_));
  return std::max(0.0, overlap) / geo_.radius;
}

StepResult Bumps1D::observe(double reward, bool done, bool truncated, bool success) const {
  StepResult r;
  r.observation = {finger_, deflection()};
  r.reward = reward;
  r.done = done;
  r.truncated = truncated;
  r.success = success;
  r.privileged_state = {finger_, left_, right_, left0_, right0_};
  return r;
}

StepResult Bumps1D::reset(std::uint64_t episode_seed) {
  rng_.seed(episode_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  left_ = 0.2 + 0.35 * unit(rng_);
  right_ = left_ + 0.15 + 0.15 * unit(rng_);
  const double clearance = geo_.radius + geo_.step;
  do {
    finger_ = 0.05 + 0.9 * unit(rng_);
  } while (std::abs(finger_ - left_) < clearance || std::abs(finger_ - right_) < clearance);
  left0_ = left_;
  right0_ = right_;
  steps_ = 0;
  return observe(0.0, false, false, false);
}

StepResult Bumps1D::set_state(double finger, double left, double right) {
  finger_ = finger;
  left_ = left0_ = left;
  right_ = right0_ = right;
  steps_ = 0;
  return observe(0.0, false, false, false);
}

StepResult Bumps1D::step(std::span<const double> action) {
  const int a = checked_discrete_action(action, 4, "bumps-1d");
  const double dir = (a % 2 == 0) ? -1.0 : 1.0;
  const bool stiff = a >= 2;
  const double next = std::clamp(finger_ + dir * geo_.step, 0.0, 1.0);
  if (stiff) {
    for (double* bump : {&left_, &right_}) {
      if (dir > 0 && finger_ <= *bump && next > *bump - geo_.radius) *bump = next + geo_.radius;
      if (dir < 0 && finger_ >= *bump && next < *bump + geo_.radius) *bump = next - geo_.radius;
    }
  }
  finger_ = next;
  const bool capped = advance_clock();

  const bool left_moved = std::abs(left_ - left0_) > geo_.threshold;
  const bool right_moved = std::abs(right_ - right0_) > geo_.threshold;
  if (left_moved || right_moved) {
    const bool success = !left_moved && right_ - right0_ > geo_.threshold;
    return observe(success ? 1.0 : 0.0, true, false, success);
  }
  return observe(0.0, capped, capped, false);
}

Action Bumps1D::expert_action(std::span<const double> state) const {
  if (state.size() != 5) throw UsageError("bumps-1d state has 5 components");
  const double f = state[0], left = state[1], right = state[2];
  if (f < left + geo_.radius) return {1.0};   // compliant right over the left bump
  if (f <= right) return {3.0};               // stiff right into the right bump
  return {0.0};                               // compliant left back over it
}

Bumps2D::Bumps2D(const EnvConfig& config) : Environment(resolve_max_steps(config, "bumps-2d")) {
  penalty_ = config.get("penalty", 0.0) != 0.0;
  size_ = static_cast<int>(config.get("size", 10));
  if (size_ < 6) throw ConfigError("bumps-2d size must be at least 6");
  rng_.seed(config.seed);
}

std::vector<double> Bumps2D::reward_set() const {
  if (penalty_) return {0.0, 1.0, -100.0};
  return {0.0, 1.0};
}

StepResult Bumps2D::observe(double reward, bool done, bool truncated, bool success) const {
  StepResult r;
  const double scale = 1.0 / (size_ - 1);
  double contact = 0.0;
  if (on_big(fx_, fy_, bx_, by_)) contact = 1.0;
  if (on_small(fx_, fy_, sx_, sy_)) contact = 0.5;
  r.observation = {fx_ * scale, fy_ * scale, contact};
  if (penalty_) r.observation.push_back(visited_ ? 1.0 : 0.0);
  r.reward = reward;
  r.done = done;
  r.truncated = truncated;
  r.success = success;
  r.privileged_state = {double(fx_), double(fy_), double(bx_), double(by_), double(sx_), double(sy_), visited_ ? 1.0 : 0.0};
  return r;
}

StepResult Bumps2D::reset(std::uint64_t episode_seed) {
  rng_.seed(episode_seed);
  std::uniform_int_distribution<int> inner(1, size_ - 2), any(0, size_ - 1);
  bx_ = inner(rng_);
  by_ = inner(rng_);
  do {
    sx_ = any(rng_);
    sy_ = any(rng_);
  } while (std::max(std::abs(sx_ - bx_), std::abs(sy_ - by_)) < 3);
  do {
    fx_ = any(rng_);
    fy_ = any(rng_);
  } while (on_big(fx_, fy_, bx_, by_) || on_small(fx_, fy_, sx_, sy_));
  visited_ = false;
  steps_ = 0;
  return observe(0.0, false, false, false);
}

StepResult Bumps2D::set_state(int fx, int fy, int bx, int by, int sx, int sy, bool visited) {
  fx_ = fx;
  fy_ = fy;
  bx_ = bx;
  by_ = by;
  sx_ = sx;
  sy_ = sy;
  visited_ = visited || on_small(fx, fy, sx, sy);
  steps_ = 0;
  return observe(0.0, false, false, false);
}

StepResult Bumps2D::step(std::span<const double> action) {
  const int a = checked_discrete_action(action, 5, "bumps-2d");
  const bool capped = advance_clock();
  if (a == kStay) {
    const bool big = on_big(fx_, fy_, bx_, by_);
    double reward = 0.0;
    if (big) reward = (penalty_ && !visited_) ? -100.0 : 1.0;
    return observe(reward, true, false, big);
  }
  static constexpr int kDx[] = {-1, 1, 0, 0};
  static constexpr int kDy[] = {0, 0, -1, 1};
  fx_ = std::clamp(fx_ + kDx[a], 0, size_ - 1);
  fy_ = std::clamp(fy_ + kDy[a], 0, size_ - 1);
  if (on_small(fx_, fy_, sx_, sy_)) visited_ = true;
  return observe(0.0, capped, capped, false);
}

Action Bumps2D::expert_action(std::span<const double> state) const {
  if (state.size() != 7) throw UsageError("bumps-2d state has 7 components");
  const int fx = static_cast<int>(state[0]), fy = static_cast<int>(state[1]);
  const int bx = static_cast<int>(state[2]), by = static_cast<int>(state[3]);
  const int tx = std::clamp(fx, bx - 1, bx + 1), ty = std::clamp(fy, by - 1, by + 1);
  if (fx < tx) return {double(kRight)};
  if (fx > tx) return {double(kLeft)};
  if (fy < ty) return {double(kDown)};
  if (fy > ty) return {double(kUp)};
  return {double(kStay)};
}

}  // namespace cosil::env
