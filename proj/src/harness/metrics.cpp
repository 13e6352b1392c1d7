#include "cosil/harness/metrics.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "cosil/errors.hpp"

namespace cosil::harness {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_cell(const std::string& s, const std::string& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw ValidationError(path + ": bad number '" + s + "'");
  return v;
}

template <typename Row, typename Fill>
std::vector<Row> read_csv(const std::string& path, const char* header, std::size_t columns, Fill fill) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != header) throw ValidationError(path + ": unexpected header");
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != columns) throw ValidationError(path + ": wrong column count");
    std::vector<double> v;
    for (const auto& c : cells) v.push_back(parse_cell(c, path));
    rows.push_back(fill(v));
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MetricsWriter::MetricsWriter(const std::string& stem)
    : metrics_(stem + ".csv", std::ios::trunc), timing_(stem + ".timing.csv", std::ios::trunc) {
  if (!metrics_ || !timing_) throw ConfigError("cannot write metrics at " + stem);
  metrics_ << kMetricsHeader << "\n" << std::flush;
  timing_ << kTimingHeader << "\n" << std::flush;
}

void MetricsWriter::append(const MetricRow& r) {
  if (any_ && r.step <= last_step_) throw UsageError("metric rows must be strictly increasing in step");
  any_ = true;
  last_step_ = r.step;
  metrics_ << r.seed << ',' << r.step << ',' << format_double(r.eval_return) << ',' << format_double(r.eval_success)
           << ',' << format_double(r.divergence) << ',' << format_double(r.alpha) << ','
           << format_double(r.actor_loss) << ',' << format_double(r.critic_loss) << "\n"
           << std::flush;
  timing_ << r.seed << ',' << r.step << ',' << format_double(r.wall_seconds) << "\n" << std::flush;
}

TraceWriter::TraceWriter(const std::string& stem) : out_(stem + ".trace.csv", std::ios::trunc) {
  if (!out_) throw ConfigError("cannot write trace at " + stem);
  out_ << kTraceHeader << "\n";
}

void TraceWriter::append(const TraceRow& r) {
  out_ << r.update << ',' << r.step << ',' << format_double(r.divergence) << ',' << format_double(r.alpha) << ','
       << format_double(r.entropy) << ',' << format_double(r.actor_loss) << ',' << format_double(r.critic_loss)
       << "\n";
}

std::vector<MetricRow> read_metrics(const std::string& path) {
  return read_csv<MetricRow>(path, kMetricsHeader, 8, [](const std::vector<double>& v) {
    MetricRow r;
    r.seed = static_cast<std::uint64_t>(v[0]);
    r.step = static_cast<std::uint64_t>(v[1]);
    r.eval_return = v[2];
    r.eval_success = v[3];
    r.divergence = v[4];
    r.alpha = v[5];
    r.actor_loss = v[6];
    r.critic_loss = v[7];
    return r;
  });
}

std::vector<TraceRow> read_trace(const std::string& path) {
  return read_csv<TraceRow>(path, kTraceHeader, 7, [](const std::vector<double>& v) {
    TraceRow r;
    r.update = static_cast<std::uint64_t>(v[0]);
    r.step = static_cast<std::uint64_t>(v[1]);
    r.divergence = v[2];
    r.alpha = v[3];
    r.entropy = v[4];
    r.actor_loss = v[5];
    r.critic_loss = v[6];
    return r;
  });
}

}  // namespace cosil::harness
