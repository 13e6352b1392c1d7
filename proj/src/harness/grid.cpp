#include "cosil/harness/grid.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>

#include "cosil/errors.hpp"
#include "cosil/harness/metrics.hpp"
#include "cosil/harness/training.hpp"

namespace cosil::harness {
namespace {

bool seed_ok(const std::string& stem) {
  std::ifstream meta(stem + ".meta.json");
  if (!meta) return false;
  try {
    const auto j = nlohmann::json::parse(meta);
    return j.value("status", "") == "ok";
  } catch (const nlohmann::json::exception&) {
    return false;
  }
}

}  // namespace

std::vector<CellSummary> rank_cells(const std::vector<CellRef>& cells) {
  std::vector<CellSummary> out;
  for (const auto& cell : cells) {
    CellSummary s;
    s.label = cell.label;
    std::vector<double> returns, successes;
    for (const auto seed : cell.seeds) {
      const std::string stem = (std::filesystem::path(cell.dir) / ("seed" + std::to_string(seed))).string();
      std::vector<MetricRow> rows;
      if (seed_ok(stem)) {
        try {
          rows = read_metrics(stem + ".csv");
        } catch (const ValidationError&) {
          rows.clear();
        }
      }
      if (rows.empty()) {
        ++s.seeds_failed;
        continue;
      }
      ++s.seeds_ok;
      returns.push_back(rows.back().eval_return);
      successes.push_back(rows.back().eval_success);
    }
    if (returns.empty()) {
      s.mean_final_return = s.sd_final_return = s.mean_final_success = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double n = static_cast<double>(returns.size());
      double sum = 0.0, ssum = 0.0;
      for (std::size_t i = 0; i < returns.size(); ++i) {
        sum += returns[i];
        ssum += successes[i];
      }
      s.mean_final_return = sum / n;
      s.mean_final_success = ssum / n;
      double var = 0.0;
      for (const double r : returns) var += (r - s.mean_final_return) * (r - s.mean_final_return);
      s.sd_final_return = std::sqrt(var / n);
    }
    out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(), [](const CellSummary& a, const CellSummary& b) {
    const bool a_ok = a.seeds_ok > 0, b_ok = b.seeds_ok > 0;
    if (a_ok != b_ok) return a_ok;
    if (!a_ok) return false;
    return a.mean_final_return > b.mean_final_return;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

std::string summary_csv(const std::vector<CellSummary>& ranked) {
  std::string s = "rank,cell,seeds_ok,seeds_failed,mean_final_return,sd_final_return,mean_final_success\n";
  for (const auto& c : ranked) {
    s += std::to_string(c.rank) + "," + c.label + "," + std::to_string(c.seeds_ok) + "," +
         std::to_string(c.seeds_failed) + "," + format_double(c.mean_final_return) + "," +
         format_double(c.sd_final_return) + "," + format_double(c.mean_final_success) + "\n";
  }
  return s;
}

std::string cell_label(const KeyValues& cell) {
  if (cell.empty()) return "base";
  std::string s;
  for (const auto& [k, v] : cell) {
    if (!s.empty()) s += "+";
    s += k + "=" + v;
  }
  for (char& ch : s) {
    if (ch == '/' || ch == ',' || ch == ' ') ch = '_';
  }
  return s;
}

RunConfig cell_config(const GridSpec& spec, const KeyValues& cell) {
  RunConfig c;
  for (const auto& [k, v] : read_key_values(spec.base_path)) apply_key(c, k, v);
  for (const auto& [k, v] : spec.base_overrides) apply_key(c, k, v);
  const std::string grid_name = c.name;
  for (const auto& [k, v] : cell) apply_key(c, k, v);
  c.name = grid_name + "/" + cell_label(cell);
  c.validate();
  return c;
}

GridResult grid_search(const GridSpec& spec, const GridProgress& progress) {
  RunConfig base;
  for (const auto& [k, v] : read_key_values(spec.base_path)) apply_key(base, k, v);
  for (const auto& [k, v] : spec.base_overrides) apply_key(base, k, v);
  const auto grid_dir = std::filesystem::path(output_root(base)) / base.name;
  std::filesystem::create_directories(grid_dir);

  std::vector<CellRef> refs;
  for (const auto& cell : spec.cells()) {
    CellRef ref;
    ref.label = cell_label(cell);
    ref.dir = (grid_dir / ref.label).string();
    ref.seeds = base.seeds;
    std::filesystem::create_directories(ref.dir);
    RunConfig config;
    std::string config_error;
    try {
      config = cell_config(spec, cell);
      ref.seeds = config.seeds;
    } catch (const std::exception& e) {
      config_error = e.what();
    }
    for (const auto seed : ref.seeds) {
      if (progress) progress(ref.label, seed);
      std::string error = config_error;
      if (error.empty()) {
        try {
          train(config, seed);
        } catch (const std::exception& e) {
          error = e.what();
        }
      }
      if (!error.empty()) {
        nlohmann::json meta;
        meta["name"] = base.name + "/" + ref.label;
        meta["seed"] = seed;
        meta["status"] = "failed";
        meta["error"] = error;
        std::ofstream((std::filesystem::path(ref.dir) / ("seed" + std::to_string(seed) + ".meta.json")).string())
            << meta.dump(2) << "\n";
      }
    }
    refs.push_back(ref);
  }

  GridResult result;
  result.ranked = rank_cells(refs);
  result.summary_path = (grid_dir / "summary.csv").string();
  std::ofstream(result.summary_path, std::ios::trunc) << summary_csv(result.ranked);
  return result;
}

}  // namespace cosil::harness
