#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cosil/harness/config.hpp"

namespace cosil::harness {

/// One grid cell and the seeds it was run with.
struct CellRef {
  std::string label;
  /// Directory holding `seed<k>.csv` and `seed<k>.meta.json`.
  std::string dir;
  std::vector<std::uint64_t> seeds;
};

struct CellSummary {
  std::string label;
  std::size_t rank = 0;
  std::size_t seeds_ok = 0;
  std::size_t seeds_failed = 0;
  /// Over successful seeds, from the last metrics row. Population SD.
  double mean_final_return = 0.0;
  double sd_final_return = 0.0;
  double mean_final_success = 0.0;
};

/// Ranks cells by mean final return (best first; cells without a successful
/// seed last). Reads only the files under each cell directory.
std::vector<CellSummary> rank_cells(const std::vector<CellRef>& cells);
std::string summary_csv(const std::vector<CellSummary>& ranked);

/// "key=value+key=value", or "base" for an empty cell.
std::string cell_label(const KeyValues& cell);

/// Run configuration of one cell: base file, spec overrides, cell values,
/// and the name `<grid name>/<cell label>`.
RunConfig cell_config(const GridSpec& spec, const KeyValues& cell);

struct GridResult {
  std::string summary_path;
  std::vector<CellSummary> ranked;
};

/// Called before each (cell, seed) run.
using GridProgress = std::function<void(const std::string& label, std::uint64_t seed)>;

/// Runs every cell for every seed. Failures are recorded, never fatal.
GridResult grid_search(const GridSpec& spec, const GridProgress& progress = {});

}  // namespace cosil::harness
