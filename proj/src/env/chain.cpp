#include "cosil/env/domains.hpp"
#include "cosil/errors.hpp"

namespace cosil::env {

Chain::Chain(const EnvConfig& config) : Environment(resolve_max_steps(config, "chain")) { rng_.seed(config.seed); }

std::pair<int, double> Chain::transition(int state, int action) {
  if (state == 0) return action == 0 ? std::pair{0, 0.1} : std::pair{1, 0.0};
  return action == 1 ? std::pair{1, 1.0} : std::pair{0, 0.0};
}

StepResult Chain::observe(double reward, bool done, bool truncated) const {
  StepResult r;
  r.observation = {state_ == 0 ? 1.0 : 0.0, state_ == 1 ? 1.0 : 0.0};
  r.reward = reward;
  r.done = done;
  r.truncated = truncated;
  r.success = done && state_ == 1;
  r.privileged_state = {double(state_)};
  return r;
}

StepResult Chain::reset(std::uint64_t episode_seed) {
  rng_.seed(episode_seed);
  state_ = std::uniform_int_distribution<int>(0, 1)(rng_);
  steps_ = 0;
  return observe(0.0, false, false);
}

StepResult Chain::step(std::span<const double> action) {
  const int a = checked_discrete_action(action, 2, "chain");
  const auto [next, reward] = transition(state_, a);
  state_ = next;
  const bool capped = advance_clock();
  return observe(reward, capped, capped);
}

Action Chain::expert_action(std::span<const double> state) const {
  if (state.size() != 1) throw UsageError("chain state has 1 component");
  return {1.0};
}

}  // namespace cosil::env
