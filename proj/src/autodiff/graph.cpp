#include "cosil/autodiff/graph.hpp"

#include <algorithm>
#include <cmath>

#include "cosil/errors.hpp"

namespace cosil::ad {

const Tensor& Var::value() const {
  if (!valid()) throw UsageError("value() on an unbound variable");
  return graph->value(id);
}

Var Graph::constant(Tensor value, std::string name) {
  Var v = emit(std::move(value), "constant", {}, nullptr);
  nodes_.back().name = std::move(name);
  return v;
}

Var Graph::param(ParamStore& store, std::size_t index, bool trainable) {
  for (int id : bound_params_) {
    const Node& n = node(id);
    if (n.store == &store && n.param_index == index) {
      if (n.requires_grad != trainable) {
        throw UsageError("parameter '" + store.name(index) +
                         "' bound twice with different trainability");
      }
      return Var{this, id};
    }
  }
  Var v = emit(store.value(index), "param", {}, nullptr);
  Node& n = nodes_.back();
  n.name = store.name(index);
  n.store = &store;
  n.param_index = index;
  n.requires_grad = trainable;
  bound_params_.push_back(v.id);
  return v;
}

Var Graph::param(ParamStore& store, const std::string& name, bool trainable) {
  return param(store, store.index_of(name), trainable);
}

Var Graph::emit(Tensor value, std::string_view op, std::vector<int> parents, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  n.op = std::string(op);
  for (int p : parents) n.requires_grad = n.requires_grad || node(p).requires_grad;
  n.parents = std::move(parents);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Tensor& Graph::grad_of(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.has_grad) {
    if (!n.grad.same_shape(n.value)) {
      n.grad = Tensor(n.value.shape(), 0.0);
    } else {
      n.grad.fill(0.0);
    }
    n.has_grad = true;
  }
  return n.grad;
}

const Tensor* Graph::grad(Var v) const {
  const Node& n = node(v.id);
  return n.has_grad ? &n.grad : nullptr;
}

std::string Graph::describe(int id) const {
  const Node& n = node(id);
  std::string s = n.name.empty() ? n.op + "#" + std::to_string(id) : n.name;
  return s + n.value.shape_string();
}

void Graph::backward(Var output, const Tensor& seed) {
  if (!output.valid() || output.graph != this || nodes_.empty() ||
      static_cast<std::size_t>(output.id) >= nodes_.size()) {
    throw UsageError("backward called without a recorded graph for this output");
  }
  if (!seed.same_shape(value(output.id))) {
    throw ConfigError("backward seed shape " + seed.shape_string() + " does not match output " +
                      describe(output.id));
  }
  for (auto& n : nodes_) n.has_grad = false;
  if (!node(output.id).requires_grad) return;
  grad_of(output.id) = seed;
  for (int id = output.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.has_grad || !n.requires_grad || !n.backward) continue;
    n.backward(*this, id);
  }
  for (int id : bound_params_) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.has_grad || !n.requires_grad) continue;
    Tensor& acc = n.store->grad(n.param_index);
    double* dst = acc.data();
    const double* src = n.grad.data();
    for (std::size_t i = 0; i < acc.size(); ++i) dst[i] += src[i];
  }
}

void Graph::backward(Var output) {
  if (!output.valid()) throw UsageError("backward called without a recorded graph");
  if (value(output.id).size() != 1) {
    throw UsageError("backward() without seed needs a scalar output, got " + describe(output.id));
  }
  backward(output, Tensor::scalar(1.0));
}

void Graph::clear() {
  nodes_.clear();
  bound_params_.clear();
}

namespace {

Graph& same_graph(Var a, Var b, std::string_view op) {
  if (!a.valid() || !b.valid()) throw UsageError(std::string(op) + ": unbound operand");
  if (a.graph != b.graph) throw UsageError(std::string(op) + ": operands on different graphs");
  return *a.graph;
}

Graph& graph_of(Var a, std::string_view op) {
  if (!a.valid()) throw UsageError(std::string(op) + ": unbound operand");
  return *a.graph;
}

std::vector<std::size_t> mat_shape(std::size_t r, std::size_t c) { return {r, c}; }

struct Broadcast {
  std::size_t rows, cols;
  std::size_t ar, ac, br, bc;
  std::size_t ia(std::size_t i, std::size_t j) const { return (ar == 1 ? 0 : i) * ac + (ac == 1 ? 0 : j); }
  std::size_t ib(std::size_t i, std::size_t j) const { return (br == 1 ? 0 : i) * bc + (bc == 1 ? 0 : j); }
};

Broadcast broadcast(const Graph& g, Var a, Var b, std::string_view op) {
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  Broadcast s{0, 0, ta.rows(), ta.cols(), tb.rows(), tb.cols()};
  auto dim = [&](std::size_t x, std::size_t y) -> std::size_t {
    if (x == y) return x;
    if (x == 1) return y;
    if (y == 1) return x;
    throw ConfigError(std::string(op) + ": shape mismatch between " + g.describe(a.id) + " and " +
                      g.describe(b.id));
  };
  s.rows = dim(s.ar, s.br);
  s.cols = dim(s.ac, s.bc);
  return s;
}

template <typename F, typename DA, typename DB>
Var binary(Var a, Var b, std::string_view op, F f, DA da, DB db) {
  Graph& g = same_graph(a, b, op);
  const Broadcast s = broadcast(g, a, b, op);
  Tensor out(mat_shape(s.rows, s.cols));
  {
    const double* pa = a.value().data();
    const double* pb = b.value().data();
    double* po = out.data();
    for (std::size_t i = 0; i < s.rows; ++i) {
      for (std::size_t j = 0; j < s.cols; ++j) {
        po[i * s.cols + j] = f(pa[s.ia(i, j)], pb[s.ib(i, j)]);
      }
    }
  }
  const int ia = a.id, ib = b.id;
  return g.emit(std::move(out), op, {ia, ib}, [s, ia, ib, da, db](Graph& gr, int self) {
    const Tensor& go = gr.node(self).grad;
    const double* pa = gr.value(ia).data();
    const double* pb = gr.value(ib).data();
    const double* pg = go.data();
    if (gr.requires_grad(ia)) {
      double* ga = gr.grad_of(ia).data();
      for (std::size_t i = 0; i < s.rows; ++i) {
        for (std::size_t j = 0; j < s.cols; ++j) {
          ga[s.ia(i, j)] += pg[i * s.cols + j] * da(pa[s.ia(i, j)], pb[s.ib(i, j)]);
        }
      }
    }
    if (gr.requires_grad(ib)) {
      double* gb = gr.grad_of(ib).data();
      for (std::size_t i = 0; i < s.rows; ++i) {
        for (std::size_t j = 0; j < s.cols; ++j) {
          gb[s.ib(i, j)] += pg[i * s.cols + j] * db(pa[s.ia(i, j)], pb[s.ib(i, j)]);
        }
      }
    }
  });
}

// Elementwise unary op whose derivative is expressed via input x and output y.
template <typename F, typename D>
Var unary(Var a, std::string_view op, F f, D d) {
  Graph& g = graph_of(a, op);
  const Tensor& ta = a.value();
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < ta.size(); ++i) out[i] = f(ta[i]);
  const int ia = a.id;
  return g.emit(std::move(out), op, {ia}, [ia, d](Graph& gr, int self) {
    const Tensor& x = gr.value(ia);
    const Tensor& y = gr.value(self);
    const Tensor& go = gr.node(self).grad;
    Tensor& ga = gr.grad_of(ia);
    for (std::size_t i = 0; i < x.size(); ++i) ga[i] += go[i] * d(x[i], y[i]);
  });
}

double stable_softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var add(Var a, Var b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Var minimum(Var a, Var b) {
  // Ties route the gradient to the first operand.
  return binary(
      a, b, "minimum", [](double x, double y) { return x <= y ? x : y; },
      [](double x, double y) { return x <= y ? 1.0 : 0.0; },
      [](double x, double y) { return x <= y ? 0.0 : 1.0; });
}

Var scale(Var a, double c) {
  return unary(
      a, "scale", [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Var add_scalar(Var a, double c) {
  return unary(
      a, "add_scalar", [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Var neg(Var a) { return scale(a, -1.0); }

Var tanh(Var a) {
  return unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      a, "sigmoid", stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var relu(Var a) {
  return unary(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var exp(Var a) {
  return unary(
      a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  return unary(
      a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var log_floor(Var a, double floor) {
  return unary(
      a, "log_floor", [floor](double x) { return std::log(x > floor ? x : floor); },
      [floor](double x, double) { return x > floor ? 1.0 / x : 0.0; });
}

Var square(Var a) {
  return unary(
      a, "square", [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var softplus(Var a) {
  return unary(a, "softplus", stable_softplus,
               [](double x, double) { return stable_sigmoid(x); });
}

Var clamp(Var a, double lo, double hi) {
  return unary(
      a, "clamp", [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var softmax(Var a) {
  Graph& g = graph_of(a, "softmax");
  const Tensor& x = a.value();
  const std::size_t rows = x.rows(), cols = x.cols();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < rows; ++i) {
    const double* xr = x.data() + i * cols;
    double* yr = out.data() + i * cols;
    const double mx = *std::max_element(xr, xr + cols);
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += (yr[j] = std::exp(xr[j] - mx));
    for (std::size_t j = 0; j < cols; ++j) yr[j] /= s;
  }
  const int ia = a.id;
  return g.emit(std::move(out), "softmax", {ia}, [ia, rows, cols](Graph& gr, int self) {
    const Tensor& y = gr.value(self);
    const Tensor& go = gr.node(self).grad;
    Tensor& ga = gr.grad_of(ia);
    for (std::size_t i = 0; i < rows; ++i) {
      const double* yr = y.data() + i * cols;
      const double* gr_ = go.data() + i * cols;
      double dot = 0.0;
      for (std::size_t j = 0; j < cols; ++j) dot += gr_[j] * yr[j];
      double* gar = ga.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) gar[j] += yr[j] * (gr_[j] - dot);
    }
  });
}

Var log_softmax(Var a) {
  Graph& g = graph_of(a, "log_softmax");
  const Tensor& x = a.value();
  const std::size_t rows = x.rows(), cols = x.cols();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < rows; ++i) {
    const double* xr = x.data() + i * cols;
    double* yr = out.data() + i * cols;
    const double mx = *std::max_element(xr, xr + cols);
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += std::exp(xr[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < cols; ++j) yr[j] = xr[j] - lse;
  }
  const int ia = a.id;
  return g.emit(std::move(out), "log_softmax", {ia}, [ia, rows, cols](Graph& gr, int self) {
    const Tensor& y = gr.value(self);
    const Tensor& go = gr.node(self).grad;
    Tensor& ga = gr.grad_of(ia);
    for (std::size_t i = 0; i < rows; ++i) {
      const double* yr = y.data() + i * cols;
      const double* gr_ = go.data() + i * cols;
      double s = 0.0;
      for (std::size_t j = 0; j < cols; ++j) s += gr_[j];
      double* gar = ga.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) gar[j] += gr_[j] - std::exp(yr[j]) * s;
    }
  });
}

Var sum(Var a) {
  Graph& g = graph_of(a, "sum");
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const int ia = a.id;
  return g.emit(Tensor::scalar(s), "sum", {ia}, [ia](Graph& gr, int self) {
    const double go = gr.node(self).grad[0];
    for (double& v : gr.grad_of(ia).values()) v += go;
  });
}

Var row_sum(Var a) {
  Graph& g = graph_of(a, "row_sum");
  const Tensor& x = a.value();
  const std::size_t rows = x.rows(), cols = x.cols();
  Tensor out(mat_shape(rows, 1));
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += x.data()[i * cols + j];
    out[i] = s;
  }
  const int ia = a.id;
  return g.emit(std::move(out), "row_sum", {ia}, [ia, rows, cols](Graph& gr, int self) {
    const Tensor& go = gr.node(self).grad;
    Tensor& ga = gr.grad_of(ia);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) ga.data()[i * cols + j] += go[i];
    }
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ConfigError("mean of empty tensor " + a.graph->describe(a.id));
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var matmul(Var x, Var w) { return affine(x, w, Var{}); }

Var affine(Var x, Var w, Var b) {
  Graph& g = same_graph(x, w, "affine");
  if (b.valid() && b.graph != &g) throw UsageError("affine: bias on a different graph");
  const Tensor& tx = x.value();
  const Tensor& tw = w.value();
  const std::size_t n = tx.rows(), in = tx.cols(), out = tw.cols();
  if (tw.rows() != in) {
    throw ConfigError("affine: input " + g.describe(x.id) + " incompatible with weight " +
                      g.describe(w.id));
  }
  if (b.valid() && (b.value().rows() != 1 || b.value().cols() != out)) {
    throw ConfigError("affine: bias " + g.describe(b.id) + " incompatible with weight " +
                      g.describe(w.id));
  }
  Tensor y(mat_shape(n, out));
  if (b.valid()) {
    const double* pb = b.value().data();
    for (std::size_t i = 0; i < n; ++i) std::copy(pb, pb + out, y.data() + i * out);
  }
  kernels::gemm_nn(n, out, in, tx.data(), in, tw.data(), out, y.data(), out, b.valid());
  const int ix = x.id, iw = w.id, ib = b.valid() ? b.id : -1;
  std::vector<int> parents{ix, iw};
  if (ib >= 0) parents.push_back(ib);
  return g.emit(std::move(y), b.valid() ? "affine" : "matmul", std::move(parents),
                [ix, iw, ib, n, in, out](Graph& gr, int self) {
                  const Tensor& go = gr.node(self).grad;
                  if (gr.requires_grad(ix)) {
                    kernels::gemm_nt(n, in, out, go.data(), out, gr.value(iw).data(), out,
                                     gr.grad_of(ix).data(), in, true);
                  }
                  if (gr.requires_grad(iw)) {
                    kernels::gemm_tn_acc(n, in, out, gr.value(ix).data(), in, go.data(), out,
                                         gr.grad_of(iw).data(), out);
                  }
                  if (ib >= 0 && gr.requires_grad(ib)) {
                    double* gb = gr.grad_of(ib).data();
                    for (std::size_t i = 0; i < n; ++i) {
                      const double* gr_ = go.data() + i * out;
                      for (std::size_t j = 0; j < out; ++j) gb[j] += gr_[j];
                    }
                  }
                });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ConfigError("concat of zero operands");
  Graph& g = graph_of(parts[0], "concat");
  const std::size_t rows = parts[0].rows();
  std::size_t total = 0;
  std::vector<int> ids;
  std::vector<std::size_t> widths;
  for (const Var& p : parts) {
    same_graph(parts[0], p, "concat");
    if (p.rows() != rows) {
      throw ConfigError("concat: row mismatch between " + g.describe(parts[0].id) + " and " +
                        g.describe(p.id));
    }
    ids.push_back(p.id);
    widths.push_back(p.cols());
    total += p.cols();
  }
  Tensor out(mat_shape(rows, total));
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& t = parts[k].value();
    for (std::size_t i = 0; i < rows; ++i) {
      std::copy(t.data() + i * widths[k], t.data() + (i + 1) * widths[k],
                out.data() + i * total + off);
    }
    off += widths[k];
  }
  return g.emit(std::move(out), "concat", ids, [ids, widths, rows, total](Graph& gr, int self) {
    const Tensor& go = gr.node(self).grad;
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (gr.requires_grad(ids[k])) {
        double* ga = gr.grad_of(ids[k]).data();
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t j = 0; j < widths[k]; ++j) ga[i * widths[k] + j] += go[i * total + off + j];
        }
      }
      off += widths[k];
    }
  });
}

Var stack_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ConfigError("stack_rows of zero operands");
  Graph& g = graph_of(parts[0], "stack_rows");
  const std::size_t cols = parts[0].cols();
  std::vector<int> ids;
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  for (const Var& p : parts) {
    same_graph(parts[0], p, "stack_rows");
    if (p.cols() != cols) {
      throw ConfigError("stack_rows: column mismatch between " + g.describe(parts[0].id) +
                        " and " + g.describe(p.id));
    }
    ids.push_back(p.id);
    counts.push_back(p.rows());
    total += p.rows();
  }
  Tensor out(mat_shape(total, cols));
  std::size_t off = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data(), p.value().data() + p.value().size(), out.data() + off * cols);
    off += p.rows();
  }
  return g.emit(std::move(out), "stack_rows", ids, [ids, counts, cols](Graph& gr, int self) {
    const Tensor& go = gr.node(self).grad;
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (gr.requires_grad(ids[k])) {
        double* ga = gr.grad_of(ids[k]).data();
        const double* src = go.data() + off * cols;
        for (std::size_t i = 0; i < counts[k] * cols; ++i) ga[i] += src[i];
      }
      off += counts[k];
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  Graph& g = graph_of(a, "slice_rows");
  const Tensor& x = a.value();
  const std::size_t cols = x.cols();
  if (begin + count > x.rows()) {
    throw ConfigError("slice_rows: range [" + std::to_string(begin) + "," +
                      std::to_string(begin + count) + ") outside " + g.describe(a.id));
  }
  Tensor out(mat_shape(count, cols));
  std::copy(x.data() + begin * cols, x.data() + (begin + count) * cols, out.data());
  const int ia = a.id;
  return g.emit(std::move(out), "slice_rows", {ia}, [ia, begin, count, cols](Graph& gr, int self) {
    const Tensor& go = gr.node(self).grad;
    double* ga = gr.grad_of(ia).data() + begin * cols;
    for (std::size_t i = 0; i < count * cols; ++i) ga[i] += go[i];
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  Graph& g = graph_of(a, "slice_cols");
  const Tensor& x = a.value();
  const std::size_t rows = x.rows(), cols = x.cols();
  if (begin + count > cols) {
    throw ConfigError("slice_cols: range outside " + g.describe(a.id));
  }
  Tensor out(mat_shape(rows, count));
  for (std::size_t i = 0; i < rows; ++i) {
    std::copy(x.data() + i * cols + begin, x.data() + i * cols + begin + count,
              out.data() + i * count);
  }
  const int ia = a.id;
  return g.emit(std::move(out), "slice_cols", {ia},
                [ia, begin, count, rows, cols](Graph& gr, int self) {
                  const Tensor& go = gr.node(self).grad;
                  double* ga = gr.grad_of(ia).data();
                  for (std::size_t i = 0; i < rows; ++i) {
                    for (std::size_t j = 0; j < count; ++j) {
                      ga[i * cols + begin + j] += go[i * count + j];
                    }
                  }
                });
}

Var gru_update(Var xp, Var h, Var wh) {
  Graph& g = same_graph(xp, h, "gru_update");
  same_graph(xp, wh, "gru_update");
  const Tensor& txp = xp.value();
  const Tensor& th = h.value();
  const Tensor& tw = wh.value();
  const std::size_t n = th.rows(), hd = th.cols();
  if (tw.rows() != hd || tw.cols() != 3 * hd) {
    throw ConfigError("gru_update: recurrent weight " + g.describe(wh.id) +
                      " incompatible with hidden " + g.describe(h.id));
  }
  if (txp.rows() != n || txp.cols() != 3 * hd) {
    throw ConfigError("gru_update: input projection " + g.describe(xp.id) +
                      " incompatible with hidden " + g.describe(h.id));
  }
  const std::size_t h3 = 3 * hd;
  // Gate pre-activations from the hidden state for z and r.
  std::vector<double> zr(n * 2 * hd);
  kernels::gemm_nn(n, 2 * hd, hd, th.data(), hd, tw.data(), h3, zr.data(), 2 * hd, false);
  std::vector<double> z(n * hd), r(n * hd), c(n * hd), rh(n * hd);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < hd; ++j) {
      z[i * hd + j] = stable_sigmoid(txp.data()[i * h3 + j] + zr[i * 2 * hd + j]);
      r[i * hd + j] = stable_sigmoid(txp.data()[i * h3 + hd + j] + zr[i * 2 * hd + hd + j]);
      rh[i * hd + j] = r[i * hd + j] * th.data()[i * hd + j];
    }
  }
  kernels::gemm_nn(n, hd, hd, rh.data(), hd, tw.data() + 2 * hd, h3, c.data(), hd, false);
  Tensor out(mat_shape(n, hd));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < hd; ++j) {
      const std::size_t k = i * hd + j;
      c[k] = std::tanh(txp.data()[i * h3 + 2 * hd + j] + c[k]);
      out[k] = (1.0 - z[k]) * th.data()[k] + z[k] * c[k];
    }
  }
  const int ix = xp.id, ih = h.id, iw = wh.id;
  return g.emit(
      std::move(out), "gru_update", {ix, ih, iw},
      [ix, ih, iw, n, hd, z = std::move(z), r = std::move(r), c = std::move(c),
       rh = std::move(rh)](Graph& gr, int self) {
        const std::size_t h3 = 3 * hd;
        const Tensor& go = gr.node(self).grad;
        const double* hv = gr.value(ih).data();
        const double* w = gr.value(iw).data();
        // Pre-activation gradients, blocks [z | r | c].
        std::vector<double> dpre(n * h3, 0.0);
        std::vector<double> dh(n * hd, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < hd; ++j) {
            const std::size_t k = i * hd + j;
            const double g_ = go[k];
            dh[k] = g_ * (1.0 - z[k]);
            const double dz = g_ * (c[k] - hv[k]);
            const double dc = g_ * z[k];
            dpre[i * h3 + j] = dz * z[k] * (1.0 - z[k]);
            dpre[i * h3 + 2 * hd + j] = dc * (1.0 - c[k] * c[k]);
          }
        }
        // d(rh) = dpre_c Wh_c^T
        std::vector<double> drh(n * hd, 0.0);
        kernels::gemm_nt(n, hd, hd, dpre.data() + 2 * hd, h3, w + 2 * hd, h3, drh.data(), hd,
                         false);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < hd; ++j) {
            const std::size_t k = i * hd + j;
            const double dr = drh[k] * hv[k];
            dh[k] += drh[k] * r[k];
            dpre[i * h3 + hd + j] = dr * r[k] * (1.0 - r[k]);
          }
        }
        // dh += [dpre_z | dpre_r] [Wh_z | Wh_r]^T
        kernels::gemm_nt(n, hd, 2 * hd, dpre.data(), h3, w, h3, dh.data(), hd, true);
        if (gr.requires_grad(iw)) {
          double* gw = gr.grad_of(iw).data();
          kernels::gemm_tn_acc(n, hd, 2 * hd, hv, hd, dpre.data(), h3, gw, h3);
          kernels::gemm_tn_acc(n, hd, hd, rh.data(), hd, dpre.data() + 2 * hd, h3, gw + 2 * hd,
                               h3);
        }
        if (gr.requires_grad(ih)) {
          double* gh = gr.grad_of(ih).data();
          for (std::size_t k = 0; k < n * hd; ++k) gh[k] += dh[k];
        }
        if (gr.requires_grad(ix)) {
          double* gx = gr.grad_of(ix).data();
          for (std::size_t k = 0; k < n * h3; ++k) gx[k] += dpre[k];
        }
      });
}

Var detach(Var a) {
  Graph& g = graph_of(a, "detach");
  return g.emit(a.value(), "detach", {}, nullptr);
}

}  // namespace cosil::ad
