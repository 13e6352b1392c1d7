#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cosil::harness {

struct PlotOptions {
  std::string title = "Learning curves";
  /// "eval_return" or "eval_success".
  std::string metric = "eval_return";
  /// Trailing moving-average window per seed; 1 disables smoothing.
  std::size_t smoothing = 1;
  std::optional<double> random_line;
  std::optional<double> expert_line;
};

/// Mean and population standard deviation across seeds at each step.
struct Curve {
  std::string label;
  std::vector<double> steps, mean, sd;
  std::size_t seeds = 0;
  /// Seeds had different step grids and were resampled to the coarsest one.
  bool resampled = false;
};

/// Groups metrics files by parent directory, one curve per group.
std::vector<Curve> build_curves(const std::vector<std::string>& files, const PlotOptions& options);
std::string render_svg(const std::vector<Curve>& curves, const PlotOptions& options);
std::string curves_csv(const std::vector<Curve>& curves);

/// Sorted paths matching a shell pattern; `**` crosses directories.
/// Timing, trace and summary CSVs are skipped.
std::vector<std::string> glob_metrics(const std::string& pattern);

struct PlotOutput {
  std::string svg_path, csv_path;
  std::vector<Curve> curves;
};

/// Writes `<stem>.svg` and `<stem>.csv`.
PlotOutput emit_plots(const std::vector<std::string>& files, const std::string& stem, const PlotOptions& options);

}  // namespace cosil::harness
