#pragma once

#include <random>
#include <string>
#include <vector>

#include "cosil/autodiff/layers.hpp"
#include "cosil/env/env.hpp"

namespace cosil::agents {

struct NetConfig {
  std::size_t obs_embed = 32;
  std::size_t action_embed = 8;
  /// GRU width. 0 makes the network Markovian: features are the per-step
  /// observation encoding and earlier steps are never read.
  std::size_t hidden = 128;
  std::size_t head_width = 128;
};

/// Observation and previous-action encoders feeding a GRU.
///
/// Inputs are time-major blocks of `steps * batch` rows. The output holds the
/// hidden state after each step in the same row order, starting from zeros.
class HistoryEncoder {
 public:
  HistoryEncoder() = default;
  HistoryEncoder(ad::ParamStore& store, const std::string& prefix, std::size_t obs_dim, std::size_t action_width,
                 const NetConfig& config, std::mt19937_64& rng);

  ad::Var forward(const ad::Binding& bind, ad::Var obs, ad::Var prev_actions, std::size_t batch) const;
  /// One step from an explicit hidden state ([batch, H]); returns the new hidden.
  ad::Var step(const ad::Binding& bind, ad::Var obs, ad::Var prev_actions, ad::Var hidden) const;

  std::size_t feature_width() const { return recurrent() ? config_.hidden : config_.obs_embed; }
  bool recurrent() const { return config_.hidden > 0; }

 private:
  ad::Var encode(const ad::Binding& bind, ad::Var obs, ad::Var prev_actions) const;

  NetConfig config_;
  ad::Dense obs_fc_, action_fc_;
  ad::GruCell cell_;
};

/// Two-layer head: ReLU(x W1 + b1) W2 + b2.
class Head {
 public:
  Head() = default;
  Head(ad::ParamStore& store, const std::string& prefix, std::size_t in, std::size_t width, std::size_t out,
       std::mt19937_64& rng);
  ad::Var forward(const ad::Binding& bind, ad::Var x) const;

 private:
  ad::Dense hidden_, out_;
};

/// History policy. Continuous heads emit [mean | log_std]; discrete heads emit logits.
class PolicyNet {
 public:
  PolicyNet() = default;
  PolicyNet(ad::ParamStore& store, const std::string& prefix, std::size_t obs_dim, const env::ActionSpace& space,
            const NetConfig& config, std::mt19937_64& rng);

  struct Output {
    ad::Var features;
    ad::Var mean, log_std;  // continuous
    ad::Var logits;         // discrete
  };
  Output forward(const ad::Binding& bind, ad::Var obs, ad::Var prev_actions, std::size_t batch) const;
  Output step(const ad::Binding& bind, ad::Var obs, ad::Var prev_actions, ad::Var hidden) const;
  const HistoryEncoder& encoder() const { return encoder_; }

 private:
  Output heads(const ad::Binding& bind, ad::Var features) const;

  env::ActionSpace space_;
  HistoryEncoder encoder_;
  Head head_;
};

/// History action-value network. Continuous: Q(h, a) from [features | a].
/// Discrete: one value per action from the features.
class CriticNet {
 public:
  CriticNet() = default;
  CriticNet(ad::ParamStore& store, const std::string& prefix, std::size_t obs_dim, const env::ActionSpace& space,
            const NetConfig& config, std::mt19937_64& rng);

  ad::Var features(const ad::Binding& bind, ad::Var obs, ad::Var prev_actions, std::size_t batch) const;
  /// [N,1] for continuous (needs `action`), [N,n] for discrete.
  ad::Var values(const ad::Binding& bind, ad::Var features, ad::Var action = {}) const;

 private:
  env::ActionSpace space_;
  HistoryEncoder encoder_;
  Head head_;
};

}  // namespace cosil::agents
