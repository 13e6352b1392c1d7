#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cosil/autodiff/tensor.hpp"
#include "cosil/env/env.hpp"

namespace cosil::replay {

/// Widths shared by every record in a buffer.
struct Dims {
  std::size_t obs = 0;
  std::size_t state = 0;
  /// Stored action width (1 for discrete).
  std::size_t action = 0;
  /// Network encoding width of an action (n for discrete).
  std::size_t action_encoding = 0;

  static Dims of(const env::Environment& env);
  bool operator==(const Dims&) const = default;
};

/// One episode, stored as flat per-step arrays of length L.
///
/// Step t holds s_t, o_t, the encoded previous action (zeros at t = 0), a_t,
/// r_t and the termination flag d_t. The state and observation after the
/// last action are kept separately for bootstrapping. `terminal` is false
/// when the episode was cut by the step cap; then every d_t is 0.
struct EpisodeRecord {
  std::vector<double> states;
  std::vector<double> observations;
  std::vector<double> prev_actions;
  std::vector<double> actions;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  std::vector<double> final_state;
  std::vector<double> final_observation;
  bool terminal = false;

  std::size_t length() const { return rewards.size(); }
  bool operator==(const EpisodeRecord&) const = default;
};

/// Accumulates an episode step by step while acting.
class EpisodeBuilder {
 public:
  EpisodeBuilder(const env::ActionSpace& space, Dims dims);

  /// Records the reset observation.
  void begin(const env::StepResult& initial);
  /// Records an action and the step it produced.
  void add(std::span<const double> action, const env::StepResult& next);
  bool empty() const { return record_.length() == 0; }
  /// Encoded previous action for the next step.
  const std::vector<double>& prev_action() const { return prev_; }
  EpisodeRecord finish();

 private:
  env::ActionSpace space_;
  Dims dims_;
  EpisodeRecord record_;
  std::vector<double> state_, obs_, prev_;
};

/// Time-major padded batch. Row t * B + b belongs to episode b at window
/// step t. Observations, states and previous actions carry T + 1 rows per
/// episode: row T is the successor of the last step. Padded rows are zero.
struct PaddedBatch {
  std::size_t batch = 0;
  std::size_t steps = 0;
  ad::Tensor observations;  // [(T+1)B, obs]
  ad::Tensor states;        // [(T+1)B, state]
  ad::Tensor prev_actions;  // [(T+1)B, action_encoding]
  ad::Tensor actions;       // [TB, action]
  ad::Tensor rewards;       // [TB, 1]
  ad::Tensor dones;         // [TB, 1]
  ad::Tensor mask;          // [TB, 1], 1 for real steps
  std::vector<std::size_t> lengths;
  std::vector<std::size_t> episode_index;
  std::vector<std::size_t> window_start;

  std::size_t row(std::size_t t, std::size_t b) const { return t * batch + b; }
  double valid_steps() const;
};

/// Episode replay with capacity counted in transitions and oldest-first
/// eviction. Sampling is uniform over episodes, with replacement.
class ReplayBuffer {
 public:
  ReplayBuffer(env::ActionSpace space, Dims dims, std::size_t capacity = 1000000);

  /// Throws ValidationError on malformed records.
  void push(EpisodeRecord record);

  /// nullopt when the buffer is empty.
  std::optional<PaddedBatch> sample(std::size_t batch, std::size_t max_len, std::mt19937_64& rng) const;
  /// Batch built from explicit (episode, window start, window length) picks.
  PaddedBatch gather(const std::vector<std::size_t>& episodes, const std::vector<std::size_t>& starts,
                     const std::vector<std::size_t>& lengths) const;

  std::size_t episodes() const { return episodes_.size(); }
  std::size_t transitions() const { return stored_; }
  std::uint64_t total_pushed() const { return total_pushed_; }
  std::size_t capacity() const { return capacity_; }
  const Dims& dims() const { return dims_; }
  const env::ActionSpace& action_space() const { return space_; }
  const EpisodeRecord& episode(std::size_t i) const { return episodes_.at(i); }

  void validate(const EpisodeRecord& record) const;

  void save(std::ostream& os) const;
  void load(std::istream& is);
  void save_file(const std::string& path) const;
  void load_file(const std::string& path);

 private:
  env::ActionSpace space_;
  Dims dims_;
  std::size_t capacity_;
  std::deque<EpisodeRecord> episodes_;
  std::size_t stored_ = 0;
  std::uint64_t total_pushed_ = 0;
};

}  // namespace cosil::replay
