#include "cosil/agents/divergence.hpp"

#include <algorithm>
#include <cmath>

#include "cosil/errors.hpp"

namespace cosil::agents {

double squared_divergence(std::span<const double> expert, std::span<const double> mean) {
  if (expert.size() != mean.size()) throw ConfigError("divergence: expert and mean widths differ");
  double d = 0.0;
  for (std::size_t i = 0; i < expert.size(); ++i) d += (expert[i] - mean[i]) * (expert[i] - mean[i]);
  return d;
}

double cross_entropy_divergence(std::span<const double> expert, std::span<const double> probs, double floor) {
  if (expert.size() != probs.size()) throw ConfigError("divergence: expert and policy widths differ");
  double d = 0.0;
  for (std::size_t k = 0; k < expert.size(); ++k) {
    if (expert[k] != 0.0) d -= expert[k] * std::log(std::max(probs[k], floor));
  }
  return d;
}

double kl_divergence(std::span<const double> p, std::span<const double> q, double floor) {
  if (p.size() != q.size()) throw ConfigError("kl: widths differ");
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) d += p[k] * (std::log(p[k]) - std::log(std::max(q[k], floor)));
  }
  return d;
}

ad::Var squared_divergence(ad::Var expert, ad::Var mean) { return ad::row_sum(ad::square(ad::sub(expert, mean))); }

ad::Var cross_entropy_divergence(ad::Var expert_onehot, ad::Var log_probs) {
  return ad::neg(ad::row_sum(ad::mul(expert_onehot, log_probs)));
}

double expert_target(double action, bool inverse_squash) {
  if (!inverse_squash) return action;
  constexpr double kShrink = 1e-3;
  return std::atanh(std::clamp(action, -1.0 + kShrink, 1.0 - kShrink));
}

}  // namespace cosil::agents
