#include "cosil/autodiff/adam.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "cosil/errors.hpp"

namespace cosil::ad {

Adam::Adam(const ParamStore& store, AdamConfig config) : config_(config) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    m_.emplace_back(store.value(i).shape(), 0.0);
    v_.emplace_back(store.value(i).shape(), 0.0);
  }
}

void Adam::step(ParamStore& store) {
  if (store.size() != m_.size()) throw UsageError("Adam state does not match parameter store");
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < store.size(); ++i) {
    Tensor& p = store.value(i);
    Tensor& g = store.grad(i);
    double* m = m_[i].data();
    double* v = v_[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = g[k];
      m[k] = b1 * m[k] + (1.0 - b1) * gk;
      v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      p[k] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
    g.fill(0.0);
  }
}

void Adam::save(std::ostream& os) const {
  io::write_f64(os, config_.lr);
  io::write_f64(os, config_.beta1);
  io::write_f64(os, config_.beta2);
  io::write_f64(os, config_.eps);
  io::write_u64(os, t_);
  io::write_u64(os, m_.size());
  for (std::size_t i = 0; i < m_.size(); ++i) {
    io::write_tensor(os, m_[i]);
    io::write_tensor(os, v_[i]);
  }
}

void Adam::load(std::istream& is) {
  config_.lr = io::read_f64(is);
  config_.beta1 = io::read_f64(is);
  config_.beta2 = io::read_f64(is);
  config_.eps = io::read_f64(is);
  t_ = io::read_u64(is);
  const auto n = io::read_u64(is);
  if (n != m_.size()) throw ValidationError("Adam state size mismatch in checkpoint");
  for (std::size_t i = 0; i < n; ++i) {
    Tensor m = io::read_tensor(is);
    Tensor v = io::read_tensor(is);
    if (!m.same_shape(m_[i]) || !v.same_shape(v_[i])) {
      throw ValidationError("Adam moment shape mismatch in checkpoint");
    }
    m_[i] = std::move(m);
    v_[i] = std::move(v);
  }
}

}  // namespace cosil::ad
