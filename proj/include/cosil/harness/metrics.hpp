#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace cosil::harness {

/// One evaluation point. Loss and divergence columns average the updates
/// since the previous row (NaN when there were none).
struct MetricRow {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  double eval_return = 0.0;
  double eval_success = 0.0;
  double divergence = 0.0;
  double alpha = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  /// Kept in the timing sidecar so the metrics file stays byte-deterministic.
  double wall_seconds = 0.0;
};

inline constexpr const char* kMetricsHeader = "seed,step,eval_return,eval_success,divergence,alpha,actor_loss,critic_loss";
inline constexpr const char* kTimingHeader = "seed,step,wall_seconds";
inline constexpr const char* kTraceHeader = "update,step,divergence,alpha,entropy,actor_loss,critic_loss";

/// Round-trippable double formatting used by every CSV the harness writes.
std::string format_double(double v);

/// Appends rows to `<stem>.csv` and `<stem>.timing.csv`, flushing each row.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& stem);
  void append(const MetricRow& row);

 private:
  std::ofstream metrics_, timing_;
  std::uint64_t last_step_ = 0;
  bool any_ = false;
};

/// Per-update trace, `<stem>.trace.csv`.
struct TraceRow {
  std::uint64_t update = 0;
  std::uint64_t step = 0;
  double divergence = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
};

class TraceWriter {
 public:
  explicit TraceWriter(const std::string& stem);
  void append(const TraceRow& row);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

/// Reads a metrics CSV (wall clock left at 0). Throws ValidationError.
std::vector<MetricRow> read_metrics(const std::string& path);
std::vector<TraceRow> read_trace(const std::string& path);

}  // namespace cosil::harness
