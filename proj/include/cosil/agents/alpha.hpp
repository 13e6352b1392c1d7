#pragma once

#include <iosfwd>
#include <string>

namespace cosil::agents {

enum class AlphaMode { kEntropyTarget, kDivergenceTarget, kFixed, kLinearDecay, kExponentialDecay };

AlphaMode parse_alpha_mode(const std::string& name);
std::string to_string(AlphaMode mode);

/// Temperature / penalty weight.
///
/// Target modes keep log alpha and take plain gradient steps on the alpha
/// objective, so alpha stays positive. Fixed and decay modes follow a
/// schedule of training progress and never evaluate the objective; they may
/// hold alpha = 0.
class AlphaState {
 public:
  AlphaState() : AlphaState(AlphaMode::kFixed, 0.0, 0.0, 0.0) {}
  AlphaState(AlphaMode mode, double initial, double target, double lr);

  double value() const;
  double log_value() const { return log_alpha_; }
  AlphaMode mode() const { return mode_; }
  double target() const { return target_; }
  double lr() const { return lr_; }
  bool adaptive() const { return mode_ == AlphaMode::kEntropyTarget || mode_ == AlphaMode::kDivergenceTarget; }

  /// One gradient step on log alpha given the batch measurement (mean
  /// divergence or entropy). Divergence mode: log a -= lr * a * (target - measured).
  /// Entropy mode: log a -= lr * a * (measured - target). Returns the new alpha.
  double update(double measured);

  /// Schedules for fixed/decay modes; `fraction` is training progress in [0,1].
  /// Linear: a0 (1 - f). Exponential: a0 * 1e-3^f.
  void set_progress(double fraction);

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  AlphaMode mode_;
  double initial_;
  double target_;
  double lr_;
  double log_alpha_ = 0.0;
  double scheduled_ = 0.0;
};

}  // namespace cosil::agents
