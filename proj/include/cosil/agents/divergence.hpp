#pragma once

#include <span>

#include "cosil/autodiff/graph.hpp"

namespace cosil::agents {

/// Squared distance to the expert's action (continuous) or cross-entropy
/// against the expert's one-hot action (discrete).
enum class DivergenceKind { kSquaredMean, kCrossEntropy };

/// sum_i (expert_i - mean_i)^2
double squared_divergence(std::span<const double> expert, std::span<const double> mean);
/// -sum_k expert_k log(max(probs_k, floor))
double cross_entropy_divergence(std::span<const double> expert, std::span<const double> probs, double floor = 1e-8);
/// sum_k p_k (log p_k - log max(q_k, floor)), with 0 log 0 = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q, double floor = 1e-8);

/// Per-row divergences, [N,1]. `expert` is [N,d] raw actions or [N,n] one-hot.
ad::Var squared_divergence(ad::Var expert, ad::Var mean);
ad::Var cross_entropy_divergence(ad::Var expert_onehot, ad::Var log_probs);

/// Expert action as compared against the pre-squash mean. Raw by default;
/// with `inverse_squash`, atanh of the action shrunk by 1e-3 from the bounds.
double expert_target(double action, bool inverse_squash);

}  // namespace cosil::agents
