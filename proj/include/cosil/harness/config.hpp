#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cosil/agents/agent.hpp"
#include "cosil/env/env.hpp"

namespace cosil::harness {

/// Ordered `key = value` pairs. `#` starts a comment; blank lines are skipped.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(const std::string& text, const std::string& origin = "<config>");
KeyValues read_key_values(const std::string& path);

/// Everything a training run needs.
struct RunConfig {
  std::string name = "run";
  env::EnvConfig env;
  agents::AgentConfig agent;
  /// Alpha schedule label kept for metadata ("adaptive", "fixed:0.3", ...).
  std::string alpha_schedule;
  std::uint64_t total_steps = 150000;
  std::uint64_t eval_interval = 5000;
  std::size_t eval_episodes = 10;
  std::uint64_t eval_seed_base = 1000000000;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3};
  std::uint64_t warmup_steps = 1000;
  /// Environment steps per gradient update.
  std::uint64_t update_every = 1;
  std::size_t batch_size = 32;
  /// Truncation window; 0 selects the environment's step cap.
  std::size_t max_len = 0;
  std::size_t replay_capacity = 1000000;
  std::string out_dir = "runs";
  /// Write the per-update trace CSV.
  bool trace = true;

  void validate() const;
};

/// Applies one key. Throws ConfigError for unknown keys or bad values.
void apply_key(RunConfig& config, const std::string& key, const std::string& value);
RunConfig parse_run_config(const KeyValues& kv);
RunConfig load_run_config(const std::string& path);
/// Canonical text form; parsing it yields the same configuration.
std::string to_text(const RunConfig& config);

/// Named hyperparameter axes over a base configuration.
struct GridSpec {
  std::string base_path;
  KeyValues base_overrides;
  /// Axis key -> values, in file order.
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;

  /// Cartesian product, last axis fastest.
  std::vector<KeyValues> cells() const;
};

GridSpec parse_grid_spec(const KeyValues& kv, const std::string& origin_dir);
GridSpec load_grid_spec(const std::string& path);

/// Output root: COSIL_OUT_DIR if set, else the configured directory.
std::string output_root(const RunConfig& config);

}  // namespace cosil::harness
