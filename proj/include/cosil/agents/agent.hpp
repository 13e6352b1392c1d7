#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>

#include "cosil/agents/alpha.hpp"
#include "cosil/agents/networks.hpp"
#include "cosil/autodiff/adam.hpp"
#include "cosil/replay/replay.hpp"

namespace cosil::agents {

/// Learning rule. Markovian SAC is kSac with NetConfig::hidden = 0.
enum class Algorithm { kSac, kCosil, kDagger, kBcSac, kBc2Sac, kAdvOff };

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm algorithm);

struct AgentConfig {
  Algorithm algorithm = Algorithm::kCosil;
  NetConfig net;
  double gamma = 0.99;
  double tau = 0.005;
  /// Debug: target <- tau * target + (1 - tau) * online, as literally written.
  bool literal_soft_update = false;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double alpha_lr = 3e-4;
  double alpha_init = 1.0;
  /// Unset: divergence target for COSIL, entropy target for SAC-based agents.
  std::optional<AlphaMode> alpha_mode;
  /// Divergence setpoint for COSIL.
  double target_divergence = 0.7;
  /// Entropy setpoint. Unset: -dim (continuous), 0.7 ln n (discrete).
  std::optional<double> target_entropy;
  double grad_clip = 10.0;
  /// COSIL: also keep the entropy bonus.
  bool cosil_entropy = false;
  /// Debug: continuous COSIL with the divergence added as a bonus.
  bool appendix_sign = false;
  /// Compare atanh(expert) against the pre-squash mean.
  bool inverse_squash_expert = false;
  /// BC+SAC static weight.
  double bc_weight = 0.5;
  /// BC2SAC fraction of total steps spent in the BC phase.
  double bc_fraction = 0.5;
  /// ADV-Off weighting temperature.
  double advisor_temperature = 8.0;

  void validate() const;
};

/// Expert query: privileged state -> action in environment units.
using ExpertFn = std::function<env::Action(std::span<const double>)>;

/// Where training is, for schedules (BC2SAC phase, alpha decay).
struct Progress {
  std::uint64_t step = 0;
  std::uint64_t total = 0;
  double fraction() const { return total == 0 ? 1.0 : static_cast<double>(step) / static_cast<double>(total); }
};

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  /// Imitation and RL parts of the actor loss, each a masked mean.
  double bc_loss = 0.0;
  double rl_loss = 0.0;
  double il_loss = 0.0;
  /// Masked-mean divergence of the current policy to the expert.
  double divergence = 0.0;
  /// Masked-mean policy entropy estimate.
  double entropy = 0.0;
  /// Alpha used in this update, and after the alpha step.
  double alpha = 0.0;
  double alpha_after = 0.0;
  double q_mean = 0.0;
  bool bc_phase = false;
  /// Critic regression targets [TB,1].
  ad::Tensor targets;
  /// ADV-Off weights [TB,1].
  ad::Tensor advisor_weights;
};

/// BC2SAC phase: true (BC) iff step < fraction * total.
bool bc2sac_in_bc_phase(std::uint64_t step, std::uint64_t total, double fraction);
/// ADVISOR weight exp(-temperature * divergence), floored at the smallest positive double.
double advisor_weight(double divergence, double temperature);

/// Recurrent actor-critic with the loss selected by AgentConfig::algorithm.
///
/// Policy, two critics and their targets each own a parameter store. One
/// update builds one graph: target values from frozen copies, critic
/// regression, and the actor loss read through frozen snapshots of the
/// pre-update critics, followed by a single backward pass.
class Agent {
 public:
  Agent(const AgentConfig& config, std::size_t obs_dim, const env::ActionSpace& space, std::uint64_t seed);

  struct ActResult {
    env::Action action;
    ad::Tensor hidden;
  };
  /// Zero hidden state for a new episode ([1,H], empty when Markovian).
  ad::Tensor initial_hidden() const;
  /// `prev_action` is the encoded previous action (zeros at reset).
  ActResult act(std::span<const double> observation, std::span<const double> prev_action, const ad::Tensor& hidden,
                bool deterministic);
  /// Action probabilities (discrete) for the same inputs, for tests.
  std::vector<double> action_probabilities(std::span<const double> observation, std::span<const double> prev_action,
                                           const ad::Tensor& hidden);

  /// Builds the losses and accumulates gradients, without stepping.
  UpdateStats compute_gradients(const replay::PaddedBatch& batch, const ExpertFn& expert, Progress progress);
  /// Full update: gradients, clipping, Adam steps, alpha step, soft update.
  UpdateStats update(const replay::PaddedBatch& batch, const ExpertFn& expert, Progress progress);

  void soft_update();
  /// Copies online critics into the targets.
  void sync_targets();

  const AgentConfig& config() const { return config_; }
  const env::ActionSpace& action_space() const { return space_; }
  std::size_t obs_dim() const { return obs_dim_; }
  AlphaState& alpha() { return alpha_; }
  const AlphaState& alpha() const { return alpha_; }
  ad::ParamStore& policy_store() { return policy_store_; }
  ad::ParamStore& critic_store(int i) { return critic_store_[i]; }
  ad::ParamStore& target_store(int i) { return target_store_[i]; }
  ad::ParamStore& il_store() { return il_store_; }
  const ad::ParamStore& policy_store() const { return policy_store_; }
  const ad::ParamStore& il_store() const { return il_store_; }
  std::uint64_t updates() const { return updates_; }
  bool uses_critics() const { return config_.algorithm != Algorithm::kDagger; }
  bool uses_il_policy() const { return config_.algorithm == Algorithm::kAdvOff; }

  /// Environment-unit action to the policy's (-1,1) scale, and back.
  double to_unit(double a, std::size_t dim) const;
  double from_unit(double u, std::size_t dim) const;

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  UpdateStats build_and_backward(const replay::PaddedBatch& batch, const ExpertFn& expert, Progress progress);
  double imitation_step(const replay::PaddedBatch& batch, const ad::Tensor& expert_rows, std::size_t rows);
  ad::Tensor expert_targets(const replay::PaddedBatch& batch, const ExpertFn& expert, std::size_t rows) const;
  void step_optimizers(const UpdateStats& stats);
  double default_target_entropy() const;

  AgentConfig config_;
  std::size_t obs_dim_;
  env::ActionSpace space_;
  AlphaState alpha_;

  ad::ParamStore policy_store_;
  ad::ParamStore critic_store_[2];
  ad::ParamStore target_store_[2];
  ad::ParamStore il_store_;
  PolicyNet policy_;
  CriticNet critic_[2];
  PolicyNet il_policy_;
  ad::Adam policy_opt_, critic_opt_[2], il_opt_;

  std::mt19937_64 update_rng_;
  std::mt19937_64 act_rng_;
  std::uint64_t updates_ = 0;
};

}  // namespace cosil::agents
