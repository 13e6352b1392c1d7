#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace cosil::ad {

/// Dense row-major tensor of doubles.
///
/// Most of the engine treats a tensor as a matrix: `rows()` is the product of
/// all leading dimensions and `cols()` is the last dimension. A scalar has
/// shape {1, 1}.
class Tensor {
 public:
  Tensor() : shape_{0, 0} {}
  Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor({1, 1}, v); }
  static Tensor row(std::span<const double> v);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::initializer_list<double> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const;
  std::size_t cols() const { return shape_.empty() ? 1 : shape_.back(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double item() const;

  void fill(double v);
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  std::string shape_string() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

bool operator==(const Tensor& a, const Tensor& b);

namespace kernels {

// C[M,N] (+)= A[M,K] * B[K,N], all row-major with explicit leading dimensions.
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);
// C[M,K] (+)= A[M,N] * B[K,N]^T
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);
// C[K,N] += A[M,K]^T * B[M,N]
void gemm_tn_acc(std::size_t m, std::size_t k, std::size_t n, const double* a, std::size_t lda,
                 const double* b, std::size_t ldb, double* c, std::size_t ldc);

}  // namespace kernels

}  // namespace cosil::ad
