#include "cosil/agents/alpha.hpp"

#include <algorithm>
#include <cmath>

#include "cosil/autodiff/params.hpp"
#include "cosil/errors.hpp"

namespace cosil::agents {
namespace {

constexpr double kLogAlphaMin = -30.0;
constexpr double kLogAlphaMax = 10.0;

}  // namespace

AlphaMode parse_alpha_mode(const std::string& name) {
  if (name == "entropy") return AlphaMode::kEntropyTarget;
  if (name == "divergence") return AlphaMode::kDivergenceTarget;
  if (name == "fixed") return AlphaMode::kFixed;
  if (name == "linear") return AlphaMode::kLinearDecay;
  if (name == "exponential") return AlphaMode::kExponentialDecay;
  throw ConfigError("unknown alpha mode '" + name + "' (entropy, divergence, fixed, linear, exponential)");
}

std::string to_string(AlphaMode mode) {
  switch (mode) {
    case AlphaMode::kEntropyTarget: return "entropy";
    case AlphaMode::kDivergenceTarget: return "divergence";
    case AlphaMode::kFixed: return "fixed";
    case AlphaMode::kLinearDecay: return "linear";
    case AlphaMode::kExponentialDecay: return "exponential";
  }
  return "fixed";
}

AlphaState::AlphaState(AlphaMode mode, double initial, double target, double lr)
    : mode_(mode), initial_(initial), target_(target), lr_(lr) {
  if (!std::isfinite(initial) || initial < 0) throw ConfigError("initial alpha must be finite and >= 0");
  if (adaptive()) {
    if (!(initial > 0)) throw ConfigError("adaptive alpha needs a positive initial value");
    if (!(lr >= 0) || !std::isfinite(target)) throw ConfigError("adaptive alpha needs lr >= 0 and a finite target");
    log_alpha_ = std::log(initial);
  }
  scheduled_ = initial;
}

double AlphaState::value() const { return adaptive() ? std::exp(log_alpha_) : scheduled_; }

double AlphaState::update(double measured) {
  if (!adaptive()) throw UsageError("alpha objective is only defined in target modes");
  if (!std::isfinite(measured)) throw TrainingDivergence("alpha update got a non-finite measurement");
  const double alpha = std::exp(log_alpha_);
  const double gap = mode_ == AlphaMode::kDivergenceTarget ? target_ - measured : measured - target_;
  log_alpha_ = std::clamp(log_alpha_ - lr_ * alpha * gap, kLogAlphaMin, kLogAlphaMax);
  return std::exp(log_alpha_);
}

void AlphaState::set_progress(double fraction) {
  const double f = std::clamp(fraction, 0.0, 1.0);
  switch (mode_) {
    case AlphaMode::kLinearDecay: scheduled_ = initial_ * (1.0 - f); break;
    case AlphaMode::kExponentialDecay: scheduled_ = initial_ * std::pow(1e-3, f); break;
    default: break;
  }
}

void AlphaState::save(std::ostream& os) const {
  ad::io::write_u64(os, static_cast<std::uint64_t>(mode_));
  for (double v : {initial_, target_, lr_, log_alpha_, scheduled_}) ad::io::write_f64(os, v);
}

void AlphaState::load(std::istream& is) {
  const auto mode = ad::io::read_u64(is);
  if (mode > static_cast<std::uint64_t>(AlphaMode::kExponentialDecay)) throw ValidationError("bad alpha mode in checkpoint");
  mode_ = static_cast<AlphaMode>(mode);
  initial_ = ad::io::read_f64(is);
  target_ = ad::io::read_f64(is);
  lr_ = ad::io::read_f64(is);
  log_alpha_ = ad::io::read_f64(is);
  scheduled_ = ad::io::read_f64(is);
}

}  // namespace cosil::agents
