#include "cosil/env/trajectory.hpp"

#include <istream>
#include <json.hpp>
#include <ostream>
#include <string>

#include "cosil/errors.hpp"

namespace cosil::env {

void write_trajectory_jsonl(std::ostream& out, const std::vector<TrajectoryStep>& steps) {
  for (const auto& s : steps) {
    nlohmann::json j;
    j["t"] = s.t;
    j["state"] = s.state;
    j["obs"] = s.obs;
    j["action"] = s.action;
    j["reward"] = s.reward;
    j["done"] = s.done;
    out << j.dump() << '\n';
  }
}

std::vector<TrajectoryStep> read_trajectory_jsonl(std::istream& in) {
  std::vector<TrajectoryStep> steps;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TrajectoryStep s;
      s.t = j.at("t").get<int>();
      s.state = j.at("state").get<std::vector<double>>();
      s.obs = j.at("obs").get<std::vector<double>>();
      s.action = j.at("action").get<std::vector<double>>();
      s.reward = j.at("reward").get<double>();
      s.done = j.at("done").get<bool>();
      steps.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("bad trajectory line: ") + e.what());
    }
  }
  return steps;
}

}  // namespace cosil::env
