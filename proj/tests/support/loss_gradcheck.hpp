#pragma once

// Finite-difference check of the full agent losses. The actor loss is
// checked against policy parameters and the critic loss against critic
// parameters: critic targets and the actor's critic reads are constants by
// construction, so those are the derivatives the update actually uses.

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "gradcheck.hpp"

namespace cosil::testing {

struct LossGradCheck {
  int instances = 0;
  int checks = 0;
  double max_rel_error = 0.0;
};

inline LossGradCheck full_loss_gradcheck(bool discrete, int instances, std::uint64_t seed, double step = 1e-6) {
  std::mt19937_64 rng(seed);
  const Setup st = discrete ? discrete_setup(3) : continuous_setup();
  LossGradCheck out;
  for (int inst = 0; inst < instances; ++inst) {
    auto buf = random_buffer(st, 6, 5, rng);
    const auto batch = *buf.sample(3, 5, rng);
    agents::AgentConfig cfg;
    cfg.algorithm = agents::Algorithm::kCosil;
    cfg.net = tiny_net(3);
    cfg.alpha_mode = agents::AlphaMode::kFixed;
    cfg.alpha_init = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    const Agent base(cfg, 2, st.space, rng());
    Agent analytic = base;
    analytic.compute_gradients(batch, expert_for(st.space), {});

    // One random coordinate in the policy and one in each critic.
    for (int which = 0; which < 3; ++which) {
      ad::ParamStore& store = which == 0 ? analytic.policy_store() : analytic.critic_store(which - 1);
      const std::size_t p = std::uniform_int_distribution<std::size_t>(0, store.size() - 1)(rng);
      const std::size_t k = std::uniform_int_distribution<std::size_t>(0, store.value(p).size() - 1)(rng);
      auto loss_at = [&](double delta) {
        Agent probe = base;
        ad::ParamStore& s = which == 0 ? probe.policy_store() : probe.critic_store(which - 1);
        s.value(p)[k] += delta;
        const auto stats = probe.compute_gradients(batch, expert_for(st.space), {});
        return which == 0 ? stats.actor_loss : stats.critic_loss;
      };
      const double numeric = (loss_at(step) - loss_at(-step)) / (2.0 * step);
      out.max_rel_error = std::max(out.max_rel_error, rel_error(store.grad(p)[k], numeric));
      ++out.checks;
    }
    ++out.instances;
  }
  return out;
}

}  // namespace cosil::testing
