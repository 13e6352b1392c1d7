#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cosil/autodiff/adam.hpp"
#include "cosil/autodiff/graph.hpp"
#include "cosil/autodiff/heads.hpp"
#include "cosil/autodiff/layers.hpp"
#include "cosil/errors.hpp"
#include "gradcheck.hpp"
#include "op_cases.hpp"

using namespace cosil;
using namespace cosil::ad;
using cosil::testing::grad_check;
using cosil::testing::away_from_zero;
using cosil::testing::project;
using cosil::testing::random_tensor;

TEST(Graph, AffineWithZeroWeightsIsZero) {
  Graph g;
  Var x = g.constant(Tensor::matrix(2, 3, {1, -2, 3, 4, 5, -6}));
  Var w = g.constant(Tensor({3, 4}, 0.0));
  Var b = g.constant(Tensor({1, 4}, 0.0));
  Var y = affine(x, w, b);
  for (double v : y.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(Graph, SoftmaxOfEqualLogitsIsUniform) {
  Graph g;
  Var p = softmax(g.constant(Tensor({1, 4}, 0.0)));
  for (double v : p.value().values()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Graph, TanhDerivativeMatchesFiniteDifference) {
  ParamStore store;
  store.add("x", Tensor::scalar(0.5));
  Graph g;
  g.backward(tanh(g.param(store, 0)));
  const double analytic = store.grad(0).item();
  const double closed = 1.0 - std::tanh(0.5) * std::tanh(0.5);
  const double h = 1e-5;
  const double numeric = (std::tanh(0.5 + h) - std::tanh(0.5 - h)) / (2 * h);
  EXPECT_NEAR(analytic, closed, 1e-15);
  EXPECT_NEAR(analytic, numeric, 1e-9);
}

TEST(Graph, QuadraticGradient) {
  ParamStore store;
  store.add("w", Tensor::matrix(1, 2, {1, 2}));
  Graph g;
  g.backward(sum(square(g.param(store, 0))));
  EXPECT_DOUBLE_EQ(store.grad(0)[0], 2.0);
  EXPECT_DOUBLE_EQ(store.grad(0)[1], 4.0);
}

TEST(Graph, RepeatedBackwardAccumulates) {
  std::mt19937_64 rng(3);
  ParamStore store;
  Dense layer(store, "l", 3, 2, rng);
  const Tensor x = random_tensor({4, 3}, rng);
  Graph g;
  Var loss = sum(tanh(layer.forward(Binding{g, store}, g.constant(x))));
  g.backward(loss);
  std::vector<Tensor> once;
  for (std::size_t i = 0; i < store.size(); ++i) once.push_back(store.grad(i));
  g.backward(loss);
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (std::size_t k = 0; k < once[i].size(); ++k) {
      EXPECT_EQ(store.grad(i)[k], 2.0 * once[i][k]);
    }
  }
}

TEST(Graph, TwoLayerNetMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  ParamStore store;
  Dense l1(store, "l1", 5, 7, rng);
  Dense l2(store, "l2", 7, 3, rng);
  const Tensor x = random_tensor({6, 5}, rng);
  auto r = grad_check(store, [&](Graph& g) {
    Binding b{g, store};
    Var h = tanh(l1.forward(b, g.constant(x)));
    return project(g, l2.forward(b, h), 5);
  });
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_analytic << " vs " << r.worst_numeric;
}

TEST(Graph, BackwardWithoutGraphIsUsageError) {
  Graph g;
  EXPECT_THROW(g.backward(Var{}), UsageError);
  Var x = g.constant(Tensor::scalar(1.0));
  g.clear();
  EXPECT_THROW(g.backward(x), UsageError);
}

TEST(Graph, ShapeMismatchNamesOperands) {
  ParamStore store;
  store.add("policy.weight", Tensor({3, 2}, 0.0));
  Graph g;
  Var x = g.constant(Tensor({4, 5}, 1.0), "observation");
  try {
    matmul(x, g.param(store, 0));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("observation"), std::string::npos) << msg;
    EXPECT_NE(msg.find("policy.weight"), std::string::npos) << msg;
  }
}

TEST(Graph, NonTrainableParametersReceiveNoGradient) {
  ParamStore a, b;
  a.add("a", Tensor::scalar(2.0));
  b.add("b", Tensor::scalar(3.0));
  Graph g;
  g.backward(mul(g.param(a, 0), g.param(b, 0, false)));
  EXPECT_DOUBLE_EQ(a.grad(0).item(), 3.0);
  EXPECT_DOUBLE_EQ(b.grad(0).item(), 0.0);
}

TEST(Graph, ZeroGradLeavesParametersUntouched) {
  ParamStore store;
  store.add("w", Tensor::matrix(1, 2, {0.5, -1.5}));
  Graph g;
  g.backward(sum(square(g.param(store, 0))));
  store.zero_grad();
  EXPECT_EQ(store.value(0)[0], 0.5);
  EXPECT_EQ(store.value(0)[1], -1.5);
  EXPECT_EQ(store.grad(0)[0], 0.0);
  EXPECT_TRUE(store.grad(0).same_shape(store.value(0)));
}

// Property: every differentiable op passes a finite-difference check over
// 100 random instances.
class OpGradient : public ::testing::TestWithParam<std::string> {};

TEST_P(OpGradient, MatchesFiniteDifferences) {
  const std::string op = GetParam();
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = cosil::testing::op_case(op, trial);
    ASSERT_LT(r.max_rel_error, 1e-4)
        << op << " trial " << trial << ": " << r.worst_analytic << " vs " << r.worst_numeric;
  }
}

INSTANTIATE_TEST_SUITE_P(AllOps, OpGradient, ::testing::ValuesIn(cosil::testing::differentiable_ops()));

TEST(Graph, SoftmaxIsAProbabilitySimplex) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Graph g;
    Var p = softmax(g.constant(random_tensor({3, 6}, rng, -30.0, 30.0)));
    for (std::size_t i = 0; i < 3; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 6; ++j) {
        EXPECT_GE(p.value().at(i, j), 0.0);
        s += p.value().at(i, j);
      }
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

TEST(Graph, ForwardAndBackwardAreBitDeterministic) {
  auto run = [] {
    std::mt19937_64 rng(21);
    ParamStore store;
    Dense l1(store, "l1", 4, 8, rng);
    GruCell cell(store, "gru", {8, 6}, rng);
    const Tensor x = random_tensor({15, 4}, rng);
    Graph g;
    Binding b{g, store};
    Var h0 = g.constant(Tensor({5, 6}, 0.0));
    auto hs = cell.unroll(b, relu(l1.forward(b, g.constant(x))), 3, h0);
    Var loss = sum(square(stack_rows(hs)));
    g.backward(loss);
    std::vector<double> out{loss.value().item()};
    for (std::size_t i = 0; i < store.size(); ++i) {
      for (double v : store.grad(i).values()) out.push_back(v);
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(RecurrentCell, ZeroStateAndWeightsIsFixedPoint) {
  std::mt19937_64 rng(1);
  ParamStore store;
  GruCell cell(store, "gru", {3, 5}, rng);
  for (std::size_t i = 0; i < store.size(); ++i) store.value(i).fill(0.0);
  Graph g;
  Binding b{g, store};
  Var h = cell.step(b, g.constant(Tensor::matrix(1, 3, {0.3, -2.0, 1.0})),
                    g.constant(Tensor({1, 5}, 0.0)));
  for (double v : h.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(RecurrentCell, DeterministicStep) {
  std::mt19937_64 rng(2);
  ParamStore store;
  GruCell cell(store, "gru", {3, 4}, rng);
  const Tensor x = random_tensor({2, 3}, rng), h = random_tensor({2, 4}, rng);
  Graph g;
  Binding b{g, store};
  Var h1 = cell.step(b, g.constant(x), g.constant(h));
  Var h2 = cell.step(b, g.constant(x), g.constant(h));
  EXPECT_EQ(h1.value(), h2.value());
}

TEST(RecurrentCell, MatchesHandWrittenEquations) {
  std::mt19937_64 rng(4);
  ParamStore store;
  GruCell cell(store, "gru", {2, 3}, rng);
  const Tensor x = random_tensor({1, 2}, rng), h = random_tensor({1, 3}, rng);
  Graph g;
  Binding b{g, store};
  const Tensor out = cell.step(b, g.constant(x), g.constant(h)).value();
  const Tensor& wi = store.value(store.index_of("gru.w_input"));
  const Tensor& wh = store.value(store.index_of("gru.w_hidden"));
  const Tensor& bias = store.value(store.index_of("gru.bias"));
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const std::size_t H = 3;
  double z[3], r[3];
  for (std::size_t j = 0; j < H; ++j) {
    double az = bias[j], ar = bias[H + j];
    for (std::size_t i = 0; i < 2; ++i) {
      az += x[i] * wi.at(i, j);
      ar += x[i] * wi.at(i, H + j);
    }
    for (std::size_t i = 0; i < H; ++i) {
      az += h[i] * wh.at(i, j);
      ar += h[i] * wh.at(i, H + j);
    }
    z[j] = sig(az);
    r[j] = sig(ar);
  }
  for (std::size_t j = 0; j < H; ++j) {
    double ac = bias[2 * H + j];
    for (std::size_t i = 0; i < 2; ++i) ac += x[i] * wi.at(i, 2 * H + j);
    for (std::size_t i = 0; i < H; ++i) ac += r[i] * h[i] * wh.at(i, 2 * H + j);
    const double expected = (1 - z[j]) * h[j] + z[j] * std::tanh(ac);
    EXPECT_NEAR(out[j], expected, 1e-14);
  }
}

TEST(RecurrentCell, GradientMatchesFiniteDifferences) {
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(500 + trial);
    ParamStore store;
    GruCell cell(store, "gru", {3, 4}, rng);
    store.add("h0", random_tensor({2, 4}, rng));
    const Tensor xs = random_tensor({6, 3}, rng);
    auto r = grad_check(store, [&](Graph& g) {
      Binding b{g, store};
      auto hs = cell.unroll(b, g.constant(xs), 3, g.param(store, store.index_of("h0")));
      return sum(hs.back());
    });
    ASSERT_LT(r.max_rel_error, 1e-4) << "trial " << trial;
  }
}

TEST(RecurrentCell, RejectsWrongWidths) {
  std::mt19937_64 rng(1);
  ParamStore store;
  GruCell cell(store, "gru", {3, 4}, rng);
  Graph g;
  Binding b{g, store};
  EXPECT_THROW(cell.step(b, g.constant(Tensor({1, 2})), g.constant(Tensor({1, 4}))), ConfigError);
  EXPECT_THROW(GruCell(store, "bad", {3, 0}, rng), ConfigError);
}

TEST(GaussianHead, ZeroNoiseAtOriginGivesModeDensity) {
  Graph g;
  Var mean = g.constant(Tensor({1, 1}, 0.0));
  Var log_std = g.constant(Tensor({1, 1}, 0.0));
  auto s = gaussian_head_sample(mean, log_std, Tensor({1, 1}, 0.0));
  EXPECT_EQ(s.action.value().item(), 0.0);
  EXPECT_NEAR(s.log_prob.value().item(), -0.5 * std::log(2 * std::numbers::pi), 1e-15);
}

TEST(GaussianHead, SaturatesAtLargeMean) {
  Graph g;
  auto s = gaussian_head_sample(g.constant(Tensor({1, 1}, 10.0)), g.constant(Tensor({1, 1}, -5.0)),
                                Tensor({1, 1}, 0.3));
  EXPECT_NEAR(s.action.value().item(), 1.0, 1e-6);
  EXPECT_NEAR(gaussian_head_mode(g.constant(Tensor({1, 1}, 10.0))).value().item(), 1.0, 1e-6);
  EXPECT_TRUE(std::isfinite(s.log_prob.value().item()));
}

TEST(GaussianHead, MonteCarloEntropyMatchesQuadrature) {
  const double mu = 0.4, log_sigma = -0.3, sigma = std::exp(log_sigma);
  // Independent oracle: closed-form Gaussian entropy plus the expected squash
  // correction E[log(1 - tanh(u)^2)] by trapezoid quadrature.
  const double gauss_entropy = 0.5 * std::log(2 * std::numbers::pi * std::numbers::e * sigma * sigma);
  double expected_corr = 0.0;
  const int steps = 20000;
  const double lo = mu - 12 * sigma, hi = mu + 12 * sigma, dx = (hi - lo) / steps;
  for (int i = 0; i <= steps; ++i) {
    const double u = lo + i * dx;
    const double pdf = std::exp(-0.5 * (u - mu) * (u - mu) / (sigma * sigma)) /
                       (sigma * std::sqrt(2 * std::numbers::pi));
    const double t = std::tanh(u);
    const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    expected_corr += w * pdf * std::log(1 - t * t) * dx;
  }
  const double oracle = gauss_entropy + expected_corr;

  std::mt19937_64 rng(99);
  const std::size_t n = 100000;
  Graph g;
  auto s = gaussian_head_sample(g.constant(Tensor({n, 1}, mu)), g.constant(Tensor({n, 1}, log_sigma)),
                                standard_normal({n, 1}, rng));
  double mc = 0.0;
  for (double v : s.log_prob.value().values()) mc -= v;
  mc /= static_cast<double>(n);
  EXPECT_NEAR(mc, oracle, 0.01 * std::abs(oracle));
}

TEST(GaussianHead, LogProbFiniteAcrossClampRange) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    std::uniform_real_distribution<double> ls(kLogStdMin, kLogStdMax), m(-5, 5);
    Graph g;
    auto s = gaussian_head_sample(g.constant(Tensor({1, 2}, m(rng))),
                                  g.constant(Tensor({1, 2}, ls(rng))), standard_normal({1, 2}, rng));
    EXPECT_TRUE(std::isfinite(s.log_prob.value().item()));
    for (double a : s.action.value().values()) {
      EXPECT_GE(a, -1.0);
      EXPECT_LE(a, 1.0);
    }
  }
}

TEST(GaussianHead, NonFiniteInputsAbort) {
  Graph g;
  EXPECT_THROW(gaussian_head_sample(g.constant(Tensor({1, 1}, std::nan(""))),
                                    g.constant(Tensor({1, 1}, 0.0)), Tensor({1, 1}, 0.0)),
               TrainingDivergence);
}

TEST(GaussianHead, GradientMatchesFiniteDifferences) {
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(700 + trial);
    ParamStore store;
    store.add("mean", random_tensor({3, 2}, rng, -2, 2));
    store.add("log_std", random_tensor({3, 2}, rng, -1.5, 0.5));
    const Tensor noise = standard_normal({3, 2}, rng);
    auto r = grad_check(store, [&](Graph& g) {
      auto s = gaussian_head_sample(g.param(store, 0), g.param(store, 1), noise);
      return add(sum(s.log_prob), project(g, s.action, trial));
    });
    ASSERT_LT(r.max_rel_error, 1e-4) << "trial " << trial;
  }
}

TEST(CategoricalHead, SamplingFollowsProbabilities) {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> counts(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[sample_categorical(p, u(rng))]++;
  for (std::size_t a = 0; a < 4; ++a) {
    const double sd = std::sqrt(n * p[a] * (1 - p[a]));
    EXPECT_NEAR(counts[a], n * p[a], 3 * sd);
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParamStore store;
  store.add("w", Tensor::matrix(1, 3, {1.0, -2.0, 0.5}));
  Adam adam(store, {.lr = 0.01});
  store.grad(0) = Tensor::matrix(1, 3, {3.0, -0.2, 1e-3});
  adam.step(store);
  EXPECT_NEAR(store.value(0)[0], 1.0 - 0.01, 1e-6);
  EXPECT_NEAR(store.value(0)[1], -2.0 + 0.01, 1e-6);
  EXPECT_NEAR(store.value(0)[2], 0.5 - 0.01, 1e-6);
  EXPECT_EQ(adam.steps(), 1u);
  for (double g : store.grad(0).values()) EXPECT_EQ(g, 0.0);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  ParamStore store;
  store.add("w", Tensor::matrix(1, 2, {1.0, 2.0}));
  Adam adam(store, {});
  adam.step(store);
  EXPECT_EQ(store.value(0)[0], 1.0);
  EXPECT_EQ(store.value(0)[1], 2.0);
  EXPECT_EQ(adam.steps(), 1u);
}

TEST(Adam, DescendsScalarQuadratic) {
  ParamStore store;
  store.add("w", Tensor::scalar(0.0));
  Adam adam(store, {.lr = 0.1});
  std::vector<double> dist;
  for (int i = 0; i < 100; ++i) {
    Graph g;
    g.backward(square(add_scalar(g.param(store, 0), -3.0)));
    adam.step(store);
    dist.push_back(std::abs(store.value(0).item() - 3.0));
  }
  // Independent scalar oracle: replay Adam by hand and check the trajectory.
  double w = 0.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 100; ++t) {
    const double g = 2.0 * (w - 3.0);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    w -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    EXPECT_NEAR(dist[t - 1], std::abs(w - 3.0), 1e-12);
  }
  // The replay shows strict decrease from step 5 up to the first crossing of
  // the optimum (step 39); momentum then overshoots with a shrinking envelope.
  for (std::size_t i = 5; i < 38; ++i) EXPECT_LT(dist[i + 1], dist[i]) << "step " << i;
  EXPECT_LT(*std::max_element(dist.begin() + 60, dist.end()),
            *std::max_element(dist.begin() + 40, dist.begin() + 60));
  EXPECT_LT(dist.back(), 0.03);
}
