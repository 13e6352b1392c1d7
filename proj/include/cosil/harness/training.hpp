#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "cosil/agents/agent.hpp"
#include "cosil/harness/config.hpp"
#include "cosil/harness/metrics.hpp"

namespace cosil::harness {

struct EvalResult {
  double mean_return = 0.0;
  double success_rate = 0.0;
  std::size_t episodes = 0;
};

/// Where one (config, seed) run writes: `<root>/<name>/seed<k>.*`.
struct RunPaths {
  std::string dir;
  std::string stem;
  std::string metrics() const { return stem + ".csv"; }
  std::string timing() const { return stem + ".timing.csv"; }
  std::string trace() const { return stem + ".trace.csv"; }
  std::string checkpoint() const { return stem + ".ckpt"; }
  std::string meta() const { return stem + ".meta.json"; }
};

RunPaths run_paths(const RunConfig& config, std::uint64_t seed);

struct TrainResult {
  RunPaths paths;
  bool failed = false;
  std::string error;
  std::uint64_t steps = 0;
  std::uint64_t updates = 0;
  EvalResult final_eval;
};

/// Optional observer, called after every update (tests and progress output).
using UpdateHook = std::function<void(std::uint64_t step, const agents::UpdateStats&)>;

/// Collect, update, evaluate. Deterministic given (config, seed). A
/// non-finite loss ends the run with `failed` set and partial metrics kept.
TrainResult train(const RunConfig& config, std::uint64_t seed, const UpdateHook& hook = {});

/// Deterministic rollouts on episode seeds `seed_base + i`.
EvalResult evaluate(agents::Agent& agent, const env::EnvConfig& env_config, std::size_t episodes,
                    std::uint64_t seed_base);
/// The scripted state expert, with privileged access.
EvalResult evaluate_expert(const env::EnvConfig& env_config, std::size_t episodes, std::uint64_t seed_base);
/// Uniform random actions; `action_seed` drives the action draws.
EvalResult evaluate_random(const env::EnvConfig& env_config, std::size_t episodes, std::uint64_t seed_base,
                           std::uint64_t action_seed);

/// Final policy with everything needed to rebuild it.
struct Checkpoint {
  RunConfig config;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  std::string agent_blob;
};

void save_checkpoint(const std::string& path, const RunConfig& config, std::uint64_t seed, std::uint64_t steps,
                     const agents::Agent& agent);
Checkpoint load_checkpoint(const std::string& path);
/// Rebuilds the agent stored in a checkpoint.
agents::Agent restore_agent(const Checkpoint& checkpoint);

/// Evaluates a checkpoint on its own environment.
EvalResult evaluate_checkpoint(const std::string& path, std::size_t episodes);

struct GapEstimate {
  double coil_return = 0.0;
  double best_return = 0.0;
  /// best_return - coil_return.
  double gap = 0.0;
  std::size_t episodes = 0;
};

/// Optimality-gap estimate on paired evaluation seeds. `episodes` >= 100.
GapEstimate optimality_gap(const std::string& env_name, const std::string& coil_checkpoint,
                           const std::string& best_checkpoint, std::size_t episodes, std::uint64_t seed_base);
GapEstimate optimality_gap(agents::Agent& coil, agents::Agent& best, const env::EnvConfig& env_config,
                           std::size_t episodes, std::uint64_t seed_base);

}  // namespace cosil::harness
