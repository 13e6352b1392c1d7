#pragma once

// Shared builders for agent tests: tiny action spaces, synthetic episodes
// and constant-output heads.

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cosil/agents/agent.hpp"

namespace cosil::testing {

using agents::Agent;

inline agents::NetConfig tiny_net(std::size_t hidden = 4) { return {4, 2, hidden, 6}; }

struct Setup {
  env::ActionSpace space;
  replay::Dims dims;
};

inline Setup continuous_setup() { return {env::ActionSpace::continuous(1, -1.0, 1.0), {2, 2, 1, 1}}; }
inline Setup discrete_setup(std::size_t n = 3) { return {env::ActionSpace::discrete(n), {2, 2, 1, n}}; }

// Expert reads the first state component: the action itself (continuous) or
// an index bucket (discrete).
inline agents::ExpertFn expert_for(const env::ActionSpace& space) {
  if (space.is_discrete()) {
    const double n = static_cast<double>(space.n);
    return [n](std::span<const double> s) {
      return env::Action{std::min(std::floor((s[0] + 1.0) * 0.5 * n), n - 1.0)};
    };
  }
  return [](std::span<const double> s) { return env::Action{s[0]}; };
}

inline replay::EpisodeRecord random_record(const Setup& st, std::size_t L, bool terminal, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  replay::EpisodeRecord r;
  std::vector<double> enc(st.dims.action_encoding, 0.0);
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t k = 0; k < st.dims.state; ++k) r.states.push_back(u(rng));
    for (std::size_t k = 0; k < st.dims.obs; ++k) r.observations.push_back(u(rng));
    r.prev_actions.insert(r.prev_actions.end(), enc.begin(), enc.end());
    env::Action a = st.space.is_discrete()
                        ? env::Action{double(std::uniform_int_distribution<std::size_t>(0, st.space.n - 1)(rng))}
                        : env::Action{u(rng)};
    r.actions.insert(r.actions.end(), a.begin(), a.end());
    st.space.encode(a, enc);
    r.rewards.push_back(u(rng));
    r.dones.push_back(terminal && t + 1 == L ? 1 : 0);
  }
  r.final_state = {u(rng), u(rng)};
  r.final_observation = {u(rng), u(rng)};
  r.terminal = terminal;
  return r;
}

inline replay::ReplayBuffer random_buffer(const Setup& st, std::size_t episodes, std::size_t max_len, std::mt19937_64& rng) {
  replay::ReplayBuffer buf(st.space, st.dims);
  for (std::size_t i = 0; i < episodes; ++i) {
    const std::size_t L = std::uniform_int_distribution<std::size_t>(1, max_len)(rng);
    buf.push(random_record(st, L, i % 2 == 0, rng));
  }
  return buf;
}

// Single-step episode with chosen state, successor and reward.
inline replay::PaddedBatch single_step(const Setup& st, double s0, double s1, double reward, bool terminal,
                                double action = 0.0) {
  replay::EpisodeRecord r;
  r.states = {s0, 0.0};
  r.observations = {0.3, -0.2};
  r.prev_actions.assign(st.dims.action_encoding, 0.0);
  r.actions = {action};
  r.rewards = {reward};
  r.dones = {static_cast<std::uint8_t>(terminal ? 1 : 0)};
  r.final_state = {s1, 0.0};
  r.final_observation = {-0.1, 0.4};
  r.terminal = terminal;
  replay::ReplayBuffer buf(st.space, st.dims);
  buf.push(r);
  return buf.gather({0}, {0}, {1});
}

// Zero the output layer of a head and set its bias, so the head is constant.
inline void set_head(ad::ParamStore& store, const std::string& prefix, const std::vector<double>& bias) {
  store.value(store.index_of(prefix + ".head.out.weight")).fill(0.0);
  auto& b = store.value(store.index_of(prefix + ".head.out.bias"));
  if (b.size() != bias.size()) throw std::invalid_argument("set_head: bias width");
  for (std::size_t i = 0; i < bias.size(); ++i) b[i] = bias[i];
}

inline void set_critics(Agent& agent, const std::vector<double>& q1, const std::vector<double>& q2) {
  set_head(agent.critic_store(0), "critic1", q1);
  set_head(agent.critic_store(1), "critic2", q2);
  agent.sync_targets();
}

}  // namespace cosil::testing
