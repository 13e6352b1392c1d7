#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "cosil/autodiff/tensor.hpp"

namespace cosil::ad {

/// Named parameter tensors with a gradient accumulator per parameter.
///
/// Iteration order is insertion order and never changes, so serialized
/// stores and optimizer moments line up by index.
class ParamStore {
 public:
  std::size_t add(std::string name, Tensor init);

  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  std::size_t index_of(const std::string& name) const;

  Tensor& value(std::size_t i) { return values_[i]; }
  const Tensor& value(std::size_t i) const { return values_[i]; }
  Tensor& grad(std::size_t i) { return grads_[i]; }
  const Tensor& grad(std::size_t i) const { return grads_[i]; }

  void zero_grad();
  /// Rescales all gradients so their joint L2 norm is at most max_norm.
  /// Returns the norm before clipping.
  double clip_grad_norm(double max_norm);
  double grad_norm() const;
  std::size_t parameter_count() const;

  /// Copies values from a store with identical layout.
  void copy_values_from(const ParamStore& other);
  /// Order-sensitive FNV-1a hash of the parameter bytes.
  std::uint64_t hash() const;

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::vector<Tensor> grads_;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization, the usual default
/// for dense and recurrent layers.
Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in, std::mt19937_64& rng);

namespace io {
void write_u64(std::ostream& os, std::uint64_t v);
std::uint64_t read_u64(std::istream& is);
void write_f64(std::ostream& os, double v);
double read_f64(std::istream& is);
void write_string(std::ostream& os, const std::string& s);
std::string read_string(std::istream& is);
void write_doubles(std::ostream& os, std::span<const double> v);
std::vector<double> read_doubles(std::istream& is);
void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);
}  // namespace io

}  // namespace cosil::ad
