#include "cosil/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>
#include <type_traits>

#include "cosil/errors.hpp"

namespace cosil::ad {

namespace {
std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != product(shape_)) {
    throw ConfigError("tensor value count " + std::to_string(data_.size()) +
                      " does not match shape " + shape_string());
  }
}

Tensor Tensor::row(std::span<const double> v) {
  return Tensor({1, v.size()}, std::vector<double>(v.begin(), v.end()));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

std::size_t Tensor::rows() const {
  if (shape_.empty()) return 1;
  if (cols() == 0) return 0;
  return data_.size() / cols();
}

double Tensor::item() const {
  if (data_.size() != 1) throw UsageError("item() on tensor of shape " + shape_string());
  return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
  os << ']';
  return os.str();
}

bool operator==(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() &&
         std::equal(a.values().begin(), a.values().end(), b.values().begin());
}

namespace kernels {
namespace {

// Four packed doubles (GCC/Clang vector extension).
typedef double v4 __attribute__((vector_size(32)));

constexpr std::size_t kColBlock = 8;

v4 load(const double* p) {
  v4 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

void store(double* p, v4 v) { std::memcpy(p, &v, sizeof v); }

// RB rows of C by 8 columns, accumulated in registers over the full k loop.
// Each element still sums over p in order.
template <std::size_t RB>
void tile(std::size_t k, const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c,
          std::size_t ldc, bool accumulate) {
  v4 acc[RB][2];
  for (std::size_t r = 0; r < RB; ++r) {
    for (std::size_t v = 0; v < 2; ++v) acc[r][v] = accumulate ? load(c + r * ldc + 4 * v) : v4{};
  }
  for (std::size_t p = 0; p < k; ++p) {
    const v4 b0 = load(b + p * ldb), b1 = load(b + p * ldb + 4);
    for (std::size_t r = 0; r < RB; ++r) {
      const double av = a[r * lda + p];
      acc[r][0] += av * b0;
      acc[r][1] += av * b1;
    }
  }
  for (std::size_t r = 0; r < RB; ++r) {
    for (std::size_t v = 0; v < 2; ++v) store(c + r * ldc + 4 * v, acc[r][v]);
  }
}

void edge(std::size_t rows, std::size_t cols, std::size_t k, const double* a, std::size_t lda, const double* b,
          std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < cols; ++j) {
      double s = accumulate ? c[r * ldc + j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[r * lda + p] * b[p * ldb + j];
      c[r * ldc + j] = s;
    }
  }
}

std::vector<double>& scratch() {
  thread_local std::vector<double> buffer;
  return buffer;
}

// dst[cols, rows] = src[rows, cols]^T
void transpose(std::size_t rows, std::size_t cols, const double* src, std::size_t ld, double* dst) {
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * ld + j];
  }
}

}  // namespace

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  const std::size_t nb = n - n % kColBlock;
  std::size_t i = 0;
  auto rows = [&](auto rb_tag) {
    constexpr std::size_t RB = decltype(rb_tag)::value;
    for (; i + RB <= m; i += RB) {
      for (std::size_t j = 0; j < nb; j += kColBlock) {
        tile<RB>(k, a + i * lda, lda, b + j, ldb, c + i * ldc + j, ldc, accumulate);
      }
    }
  };
  rows(std::integral_constant<std::size_t, 8>{});
  rows(std::integral_constant<std::size_t, 4>{});
  rows(std::integral_constant<std::size_t, 1>{});
  if (nb < n) edge(m, n - nb, k, a, lda, b + nb, ldb, c + nb, ldc, accumulate);
}

void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  auto& bt = scratch();
  bt.resize(n * k);
  transpose(k, n, b, ldb, bt.data());
  gemm_nn(m, k, n, a, lda, bt.data(), k, c, ldc, accumulate);
}

void gemm_tn_acc(std::size_t m, std::size_t k, std::size_t n, const double* a, std::size_t lda,
                 const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  auto& at = scratch();
  at.resize(k * m);
  transpose(m, k, a, lda, at.data());
  gemm_nn(k, n, m, at.data(), m, b, ldb, c, ldc, true);
}

}  // namespace kernels

}  // namespace cosil::ad
