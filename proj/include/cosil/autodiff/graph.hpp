#pragma once

#include <deque>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "cosil/autodiff/params.hpp"
#include "cosil/autodiff/tensor.hpp"

namespace cosil::ad {

class Graph;

/// Handle to a node recorded on a Graph.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  bool valid() const { return graph != nullptr && id >= 0; }
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Tape for reverse-mode differentiation.
///
/// Every op appends a node holding its forward value and a closure that
/// scatters the node's gradient into its parents. Nodes only take part in
/// backward when some ancestor is a trainable parameter, so forward-only
/// passes (targets, acting) cost nothing extra at backward time.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int)>;

  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    std::vector<int> parents;
    BackwardFn backward;
    std::string op;
    std::string name;
    ParamStore* store = nullptr;
    std::size_t param_index = 0;
  };

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value, std::string name = {});
  /// Binds a parameter. Repeated binds of the same (store, index) return the
  /// same leaf so gradients from every use accumulate in one place.
  Var param(ParamStore& store, std::size_t index, bool trainable = true);
  Var param(ParamStore& store, const std::string& name, bool trainable = true);

  /// Accumulates d(output . seed)/dp into every trainable parameter's grad.
  void backward(Var output, const Tensor& seed);
  /// Scalar output, seed 1.
  void backward(Var output);

  void clear();
  std::size_t node_count() const { return nodes_.size(); }

  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const Tensor& value(int id) const { return node(id).value; }
  /// Gradient of a node after the last backward; null if it received none.
  const Tensor* grad(Var v) const;
  std::string describe(int id) const;

  // Used by op implementations.
  Var emit(Tensor value, std::string_view op, std::vector<int> parents, BackwardFn backward);
  bool requires_grad(int id) const { return node(id).requires_grad; }
  /// Gradient accumulator of a node, allocated (zeroed) on first access.
  Tensor& grad_of(int id);

 private:
  std::deque<Node> nodes_;
  std::vector<int> bound_params_;
};

// Elementwise binary ops broadcast a dimension of size 1 against the other
// operand (row vectors over rows, column vectors over columns, scalars).
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var minimum(Var a, Var b);

Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var neg(Var a);

Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);
Var exp(Var a);
/// Natural log. Inputs must be positive.
Var log(Var a);
/// log(max(a, floor)); zero gradient where the floor is active.
Var log_floor(Var a, double floor);
Var square(Var a);
Var softplus(Var a);
/// Clamps to [lo, hi]; zero gradient outside the range.
Var clamp(Var a, double lo, double hi);

/// Row-wise softmax.
Var softmax(Var a);
/// Row-wise log-softmax.
Var log_softmax(Var a);

/// Sum of all elements, shape {1,1}.
Var sum(Var a);
/// Per-row sum, shape {rows,1}.
Var row_sum(Var a);
Var mean(Var a);

/// x W (+ b). x: [N,in], W: [in,out], b: [1,out] or invalid for no bias.
Var affine(Var x, Var w, Var b);
Var matmul(Var x, Var w);

/// Concatenates along columns; all operands share the row count.
Var concat(const std::vector<Var>& parts);
/// Concatenates along rows; all operands share the column count.
Var stack_rows(const std::vector<Var>& parts);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var slice_cols(Var a, std::size_t begin, std::size_t count);

/// Gated recurrent update given a precomputed input projection.
///
/// xp = x Wx + b with column blocks [z | r | c], h: [N,H], wh: [H,3H].
///   z  = sigmoid(xp_z + h Wh_z)
///   r  = sigmoid(xp_r + h Wh_r)
///   c  = tanh(xp_c + (r*h) Wh_c)
///   h' = (1 - z) * h + z * c
Var gru_update(Var xp, Var h, Var wh);

/// Same value, no gradient path.
Var detach(Var a);

}  // namespace cosil::ad
