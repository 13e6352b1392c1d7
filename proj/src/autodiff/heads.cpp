#include "cosil/autodiff/heads.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cosil/errors.hpp"

namespace cosil::ad {

namespace {
void require_finite(Var v, const char* what) {
  if (!v.value().all_finite()) {
    std::ostringstream os;
    os << "non-finite " << what << " in Gaussian head " << v.graph->describe(v.id) << ":";
    const auto& t = v.value();
    for (std::size_t i = 0; i < t.size() && i < 8; ++i) os << ' ' << t[i];
    throw TrainingDivergence(os.str());
  }
}
}  // namespace

SquashedGaussianSample gaussian_head_sample(Var mean, Var log_std, const Tensor& noise) {
  require_finite(mean, "mean");
  require_finite(log_std, "log-std");
  if (!mean.value().same_shape(log_std.value()) || !mean.value().same_shape(noise)) {
    throw ConfigError("gaussian head: mean " + mean.graph->describe(mean.id) + ", log-std " +
                      log_std.graph->describe(log_std.id) + " and noise " +
                      noise.shape_string() + " must share a shape");
  }
  Graph& g = *mean.graph;
  Var ls = clamp(log_std, kLogStdMin, kLogStdMax);
  Var eps = g.constant(noise, "noise");
  Var u = add(mean, mul(exp(ls), eps));
  Var a = tanh(u);

  Tensor base(noise.shape());
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < noise.size(); ++i) base[i] = -0.5 * noise[i] * noise[i] - half_log_2pi;
  Var gauss = sub(g.constant(std::move(base)), ls);
  // log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u))
  Var corr = scale(sub(add_scalar(neg(u), std::numbers::ln2), softplus(scale(u, -2.0))), 2.0);
  Var logp = row_sum(sub(gauss, corr));
  return {a, logp, u};
}

Var gaussian_head_mode(Var mean) {
  require_finite(mean, "mean");
  return tanh(mean);
}

CategoricalHead categorical_head(Var logits) {
  if (!logits.value().all_finite()) {
    throw TrainingDivergence("non-finite logits in categorical head " +
                             logits.graph->describe(logits.id));
  }
  Var p = softmax(logits);
  return {p, log_floor(p, kProbFloor)};
}

std::size_t sample_categorical(std::span<const double> probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding left u above the cumulative total; take the last positive entry.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return probs.size() - 1;
}

Tensor standard_normal(std::vector<std::size_t> shape, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) {
    std::normal_distribution<double> dist(0.0, 1.0);
    v = dist(rng);
  }
  return t;
}

}  // namespace cosil::ad
