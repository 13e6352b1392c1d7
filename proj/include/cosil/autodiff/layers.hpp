#pragma once

#include <random>
#include <string>
#include <vector>

#include "cosil/autodiff/graph.hpp"

namespace cosil::ad {

/// Which store a network's parameters live in, and whether this graph trains them.
///
/// A snapshot binding reads fresh constant copies of the current values, so
/// the same parameters can appear frozen in one loss and trainable in another
/// on the same graph.
struct Binding {
  Graph& graph;
  ParamStore& store;
  bool trainable = true;
  bool snapshot = false;

  Var operator()(std::size_t index) const {
    return snapshot ? graph.constant(store.value(index)) : graph.param(store, index, trainable);
  }
};

/// Fully connected layer y = x W + b.
class Dense {
 public:
  Dense() = default;
  Dense(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
        std::mt19937_64& rng);

  Var forward(const Binding& bind, Var x) const;
  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }

 private:
  std::size_t weight_ = 0, bias_ = 0;
  std::size_t in_ = 0, out_ = 0;
};

struct RecurrentCellConfig {
  std::size_t input_width = 0;
  std::size_t hidden_width = 128;
};

/// Gated recurrent unit. Weights: input [in,3H], recurrent [H,3H], bias [1,3H],
/// column blocks ordered update gate, reset gate, candidate.
class GruCell {
 public:
  GruCell() = default;
  GruCell(ParamStore& store, const std::string& prefix, RecurrentCellConfig config,
          std::mt19937_64& rng);

  const RecurrentCellConfig& config() const { return config_; }

  /// h' = (1 - z) * h + z * candidate.
  Var step(const Binding& bind, Var x, Var h) const;

  /// Runs the cell over a time-major input block ([steps*batch, in]) starting
  /// from h0 ([batch, H]). Returns the hidden state after each step.
  std::vector<Var> unroll(const Binding& bind, Var inputs, std::size_t steps, Var h0) const;

 private:
  RecurrentCellConfig config_;
  std::size_t w_input_ = 0, w_hidden_ = 0, bias_ = 0;
};

}  // namespace cosil::ad
