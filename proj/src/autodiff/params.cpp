#include "cosil/autodiff/params.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "cosil/errors.hpp"

namespace cosil::ad {

std::size_t ParamStore::add(std::string name, Tensor init) {
  for (const auto& n : names_) {
    if (n == name) throw ConfigError("duplicate parameter name '" + name + "'");
  }
  names_.push_back(std::move(name));
  grads_.emplace_back(init.shape(), 0.0);
  values_.push_back(std::move(init));
  return values_.size() - 1;
}

std::size_t ParamStore::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw ConfigError("no parameter named '" + name + "'");
}

void ParamStore::zero_grad() {
  for (auto& g : grads_) g.fill(0.0);
}

double ParamStore::grad_norm() const {
  double s = 0.0;
  for (const auto& g : grads_) {
    for (double v : g.values()) s += v * v;
  }
  return std::sqrt(s);
}

double ParamStore::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& g : grads_) {
      for (double& v : g.values()) v *= scale;
    }
  }
  return norm;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (other.size() != size()) throw ConfigError("parameter store layouts differ");
  for (std::size_t i = 0; i < size(); ++i) {
    if (!values_[i].same_shape(other.values_[i])) {
      throw ConfigError("parameter '" + names_[i] + "' shape mismatch on copy");
    }
    values_[i] = other.values_[i];
  }
}

std::uint64_t ParamStore::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& v : values_) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
    for (std::size_t i = 0; i < v.size() * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  }
  return h;
}

void ParamStore::save(std::ostream& os) const {
  io::write_u64(os, values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    io::write_string(os, names_[i]);
    io::write_tensor(os, values_[i]);
  }
}

void ParamStore::load(std::istream& is) {
  const auto n = io::read_u64(is);
  if (n != values_.size()) throw ValidationError("checkpoint parameter count mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    const auto name = io::read_string(is);
    if (name != names_[i]) {
      throw ValidationError("checkpoint parameter '" + name + "' where '" + names_[i] +
                            "' expected");
    }
    Tensor t = io::read_tensor(is);
    if (!t.same_shape(values_[i])) {
      throw ValidationError("checkpoint parameter '" + name + "' has shape " +
                            t.shape_string() + ", expected " + values_[i].shape_string());
    }
    values_[i] = std::move(t);
  }
  zero_grad();
}

Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in == 0 ? 1 : fan_in));
  for (double& v : t.values()) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    v = dist(rng);
  }
  return t;
}

namespace io {

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw ValidationError("unexpected end of file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  write_u64(os, bits);
}

double read_f64(std::istream& is) {
  const std::uint64_t bits = read_u64(is);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

void write_string(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const auto n = read_u64(is);
  if (n > (1ULL << 24)) throw ValidationError("implausible string length in file");
  std::string s(n, '\0');
  if (!is.read(s.data(), static_cast<std::streamsize>(n))) {
    throw ValidationError("unexpected end of file");
  }
  return s;
}

void write_doubles(std::ostream& os, std::span<const double> v) {
  write_u64(os, v.size());
  for (double x : v) write_f64(os, x);
}

std::vector<double> read_doubles(std::istream& is) {
  const auto n = read_u64(is);
  if (n > (1ULL << 32)) throw ValidationError("implausible array length in file");
  std::vector<double> v(n);
  for (auto& x : v) x = read_f64(is);
  return v;
}

void write_tensor(std::ostream& os, const Tensor& t) {
  write_u64(os, t.shape().size());
  for (auto d : t.shape()) write_u64(os, d);
  write_doubles(os, t.values());
}

Tensor read_tensor(std::istream& is) {
  const auto rank = read_u64(is);
  if (rank > 8) throw ValidationError("implausible tensor rank in file");
  std::vector<std::size_t> shape(rank);
  for (auto& d : shape) d = read_u64(is);
  auto values = read_doubles(is);
  try {
    return Tensor(std::move(shape), std::move(values));
  } catch (const ConfigError& e) {
    throw ValidationError(e.what());
  }
}

}  // namespace io

}  // namespace cosil::ad
