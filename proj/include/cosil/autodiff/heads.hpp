#pragma once

#include <random>
#include <span>

#include "cosil/autodiff/graph.hpp"

namespace cosil::ad {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kProbFloor = 1e-8;

struct SquashedGaussianSample {
  Var action;      ///< tanh(mean + std * noise), in (-1, 1)
  Var log_prob;    ///< [N,1], includes the tanh change-of-variables term
  Var pre_squash;  ///< mean + std * noise
};

/// Reparameterized draw from a tanh-squashed diagonal Gaussian.
///
/// log_std is clamped to [kLogStdMin, kLogStdMax]. The squash correction
/// log(1 - tanh(u)^2) is computed as 2 (log 2 - u - softplus(-2u)).
/// Throws TrainingDivergence if mean or log_std is non-finite.
SquashedGaussianSample gaussian_head_sample(Var mean, Var log_std, const Tensor& noise);

/// Mode of the squashed Gaussian, tanh(mean).
Var gaussian_head_mode(Var mean);

struct CategoricalHead {
  Var probs;      ///< softmax(logits)
  Var log_probs;  ///< log(max(probs, kProbFloor))
};

CategoricalHead categorical_head(Var logits);

/// Inverse-CDF draw given u ~ U[0,1).
std::size_t sample_categorical(std::span<const double> probs, double u);

/// Standard-normal tensor of the given shape.
Tensor standard_normal(std::vector<std::size_t> shape, std::mt19937_64& rng);

}  // namespace cosil::ad
