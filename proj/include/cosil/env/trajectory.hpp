#pragma once

#include <iosfwd>
#include <vector>

#include "cosil/env/env.hpp"

namespace cosil::env {

struct TrajectoryStep {
  int t = 0;
  std::vector<double> state;
  std::vector<double> obs;
  Action action;
  double reward = 0.0;
  bool done = false;
};

/// One JSON object per line with fields t, state, obs, action, reward, done.
void write_trajectory_jsonl(std::ostream& out, const std::vector<TrajectoryStep>& steps);
std::vector<TrajectoryStep> read_trajectory_jsonl(std::istream& in);

}  // namespace cosil::env
