#pragma once

// Random finite-difference cases for every differentiable op, shared by the
// unit suite and the acceptance binary.

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cosil/autodiff/graph.hpp"
#include "cosil/autodiff/heads.hpp"
#include "cosil/autodiff/layers.hpp"
#include "gradcheck.hpp"

namespace cosil::testing {

inline ad::Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double lo = -1.0,
                                double hi = 1.0) {
  ad::Tensor t(std::move(shape));
  std::uniform_real_distribution<double> d(lo, hi);
  for (double& v : t.values()) v = d(rng);
  return t;
}

// Values bounded away from kinks at zero, for relu/clamp/minimum checks.
inline ad::Tensor away_from_zero(std::vector<std::size_t> shape, std::mt19937_64& rng) {
  ad::Tensor t = random_tensor(std::move(shape), rng);
  for (double& v : t.values()) v = v >= 0 ? v + 0.05 : v - 0.05;
  return t;
}

// Weighted sum with a fixed random projection turns any output into a scalar
// loss that exercises every output element.
inline ad::Var project(ad::Graph& g, ad::Var y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return ad::sum(ad::mul(y, g.constant(random_tensor(y.value().shape(), rng))));
}

inline const std::vector<std::string>& differentiable_ops() {
  static const std::vector<std::string> ops = {
      "affine", "matmul",  "tanh",       "sigmoid", "relu",    "softmax", "log_softmax", "log",
      "log_floor", "exp",  "square",     "softplus", "clamp",  "sum",     "row_sum",     "mean",
      "concat", "stack_rows", "slice",   "minimum", "add",     "sub",     "mul",         "scale",
      "neg",    "add_scalar", "gru_update", "gaussian_head", "categorical_head"};
  return ops;
}

/// One random instance of `op`; shapes and values drawn from `trial`.
inline GradCheckResult op_case(const std::string& op, int trial) {
  using namespace ad;
  std::mt19937_64 rng(1000 + trial);
  std::uniform_int_distribution<std::size_t> dim(1, 4);
  const std::size_t n = dim(rng), m = dim(rng), k = dim(rng);
  ParamStore store;
  const bool kinked = op == "relu" || op == "clamp" || op == "minimum";
  store.add("a", kinked ? away_from_zero({n, m}, rng) : random_tensor({n, m}, rng));
  store.add("b", op == "minimum" ? away_from_zero({n, m}, rng) : random_tensor({n, m}, rng));
  store.add("w", random_tensor({m, k}, rng));
  store.add("bias", random_tensor({1, k}, rng));
  store.add("row", random_tensor({1, m}, rng));
  store.add("xp", random_tensor({n, 3 * m}, rng));
  store.add("wh", random_tensor({m, 3 * m}, rng));
  if (op == "clamp") {
    // Clamp kinks sit at a = +-0.5 after the 2x scale.
    for (double& v : store.value(0).values()) {
      if (std::abs(std::abs(v) - 0.5) < 0.05) v += v > 0 ? 0.1 : -0.1;
    }
  }
  if (op == "minimum") {
    // Keep operands apart so the min never switches inside the FD step.
    for (std::size_t i = 0; i < n * m; ++i) store.value(1)[i] = store.value(0)[i] + (store.value(1)[i] > 0 ? 0.3 : -0.3);
  }
  if (op == "gaussian_head") {
    for (double& v : store.value(1).values()) v = -0.5 + v;
  }
  const Tensor noise = standard_normal({n, m}, rng);
  auto build = [&](Graph& g) -> Var {
    Var a = g.param(store, 0);
    Var b = g.param(store, 1);
    if (op == "affine") return affine(a, g.param(store, 2), g.param(store, 3));
    if (op == "matmul") return matmul(a, g.param(store, 2));
    if (op == "tanh") return tanh(a);
    if (op == "sigmoid") return sigmoid(a);
    if (op == "relu") return relu(a);
    if (op == "softmax") return softmax(a);
    if (op == "log_softmax") return log_softmax(a);
    if (op == "log") return log(add_scalar(square(a), 0.5));
    if (op == "log_floor") return log_floor(add_scalar(square(a), 0.1), 1e-8);
    if (op == "exp") return exp(a);
    if (op == "square") return square(a);
    if (op == "softplus") return softplus(scale(a, 3.0));
    if (op == "clamp") return clamp(scale(a, 2.0), -1.0, 1.0);
    if (op == "sum") return sum(mul(a, a));
    if (op == "row_sum") return row_sum(a);
    if (op == "mean") return mean(a);
    if (op == "concat") return concat({a, tanh(b)});
    if (op == "stack_rows") return stack_rows({a, b});
    if (op == "slice") return slice_cols(slice_rows(stack_rows({a, b}), 1, n), 0, m);
    if (op == "minimum") return minimum(a, b);
    if (op == "add") return add(a, g.param(store, 4));
    if (op == "sub") return sub(g.param(store, 4), b);
    if (op == "mul") return mul(a, b);
    if (op == "scale") return scale(a, -1.7);
    if (op == "neg") return neg(a);
    if (op == "add_scalar") return add_scalar(a, 0.3);
    if (op == "gru_update") return gru_update(g.param(store, 5), a, g.param(store, 6));
    if (op == "gaussian_head") {
      auto s = gaussian_head_sample(a, b, noise);
      return concat({s.action, s.log_prob});
    }
    if (op == "categorical_head") {
      auto c = categorical_head(a);
      return concat({c.probs, c.log_probs});
    }
    throw std::runtime_error("unknown op " + op);
  };
  return grad_check(store, [&](Graph& g) { return project(g, build(g), 77 + trial); });
}

}  // namespace cosil::testing
