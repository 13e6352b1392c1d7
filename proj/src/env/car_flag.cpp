#include <algorithm>
#include <cmath>

#include "cosil/env/domains.hpp"
#include "cosil/errors.hpp"

namespace cosil::env {

CarFlag::CarFlag(const EnvConfig& config) : Environment(resolve_max_steps(config, "car-flag")) {
  geo_.start_min = config.get("start_min", geo_.start_min);
  geo_.start_max = config.get("start_max", geo_.start_max);
  geo_.indicator_radius = config.get("indicator_radius", geo_.indicator_radius);
  if (!(geo_.start_min >= 0 && geo_.start_min <= geo_.start_max && geo_.start_max < geo_.flag_position)) {
    throw ConfigError("car-flag start range must satisfy 0 <= start_min <= start_max < 1");
  }
  rng_.seed(config.seed);
}

StepResult CarFlag::observe(double reward, bool done, bool truncated, bool success) const {
  StepResult r;
  const bool near_blue = std::abs(x_ - geo_.blue_position) <= geo_.indicator_radius;
  r.observation = {x_, v_, near_blue ? side_ : 0.0};
  r.reward = reward;
  r.done = done;
  r.truncated = truncated;
  r.success = success;
  r.privileged_state = {x_, v_, side_};
  return r;
}

StepResult CarFlag::reset(std::uint64_t episode_seed) {
  rng_.seed(episode_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  side_ = unit(rng_) < 0.5 ? -1.0 : 1.0;
  const double sign = unit(rng_) < 0.5 ? -1.0 : 1.0;
  const double magnitude = geo_.start_min + (geo_.start_max - geo_.start_min) * unit(rng_);
  x_ = sign * magnitude;
  v_ = 0.0;
  steps_ = 0;
  return observe(0.0, false, false, false);
}

StepResult CarFlag::set_state(double x, double v, double green_side) {
  x_ = x;
  v_ = v;
  side_ = green_side < 0 ? -1.0 : 1.0;
  steps_ = 0;
  return observe(0.0, false, false, false);
}

StepResult CarFlag::step(std::span<const double> action) {
  if (action.size() != 1) throw UsageError("car-flag takes a single power value");
  double power = action[0];
  if (!std::isfinite(power)) throw UsageError("car-flag power is not finite");
  if (power < -1.0 || power > 1.0) {
    ++clipped_;
    power = std::clamp(power, -1.0, 1.0);
  }
  v_ = std::clamp(v_ + geo_.power * power, -geo_.max_speed, geo_.max_speed);
  x_ = std::clamp(x_ + v_, -geo_.position_limit, geo_.position_limit);
  const bool capped = advance_clock();

  int flag = 0;
  if (x_ >= geo_.flag_position) flag = 1;
  if (x_ <= -geo_.flag_position) flag = -1;
  if (flag != 0) {
    const bool green = static_cast<double>(flag) == side_;
    return observe(green ? 1.0 : -1.0, true, false, green);
  }
  return observe(-0.01, capped, capped, false);
}

Action CarFlag::expert_action(std::span<const double> state) const {
  if (state.size() != 3) throw UsageError("car-flag state has 3 components");
  return {state[2] < 0 ? -1.0 : 1.0};
}

}  // namespace cosil::env
