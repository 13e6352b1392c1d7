#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cosil/autodiff/params.hpp"

namespace cosil::ad {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam with moments laid out like the store they serve.
class Adam {
 public:
  Adam() = default;
  Adam(const ParamStore& store, AdamConfig config);

  /// Applies one update from the store's gradients, then zeroes them.
  void step(ParamStore& store);

  const AdamConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  std::uint64_t steps() const { return t_; }
  const Tensor& first_moment(std::size_t i) const { return m_[i]; }
  const Tensor& second_moment(std::size_t i) const { return v_[i]; }

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  AdamConfig config_;
  std::uint64_t t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace cosil::ad
