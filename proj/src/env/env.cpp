#include "cosil/env/env.hpp"

#include <cmath>

#include "cosil/env/domains.hpp"
#include "cosil/env/minigrid.hpp"
#include "cosil/errors.hpp"

namespace cosil::env {

ActionSpace ActionSpace::discrete(std::size_t n) {
  if (n < 2) throw ConfigError("discrete action space needs n >= 2, got " + std::to_string(n));
  ActionSpace s;
  s.kind = Kind::kDiscrete;
  s.n = n;
  s.dim = 1;
  return s;
}

ActionSpace ActionSpace::continuous(std::size_t dim, double low, double high) {
  if (dim == 0 || !std::isfinite(low) || !std::isfinite(high) || !(low < high)) {
    throw ConfigError("continuous action space needs dim > 0 and finite low < high");
  }
  ActionSpace s;
  s.kind = Kind::kContinuous;
  s.dim = dim;
  s.low.assign(dim, low);
  s.high.assign(dim, high);
  return s;
}

bool ActionSpace::contains(std::span<const double> action) const {
  if (action.size() != storage_width()) return false;
  if (is_discrete()) {
    const double a = action[0];
    return a >= 0 && a < static_cast<double>(n) && a == std::floor(a);
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(action[i] >= low[i] && action[i] <= high[i])) return false;
  }
  return true;
}

void ActionSpace::encode(std::span<const double> action, std::span<double> out) const {
  if (out.size() != encoding_width() || action.size() != storage_width()) {
    throw UsageError("action encoding width mismatch");
  }
  if (is_discrete()) {
    std::fill(out.begin(), out.end(), 0.0);
    out[static_cast<std::size_t>(action[0])] = 1.0;
  } else {
    std::copy(action.begin(), action.end(), out.begin());
  }
}

double EnvConfig::get(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

int checked_discrete_action(std::span<const double> action, std::size_t n, const std::string& domain) {
  if (action.size() != 1 || !(action[0] >= 0) || action[0] >= static_cast<double>(n) || action[0] != std::floor(action[0])) {
    throw UsageError(domain + ": invalid discrete action");
  }
  return static_cast<int>(action[0]);
}

int default_max_steps(const std::string& name) {
  if (name == "car-flag") return 160;
  if (name == "bumps-1d" || name == "bumps-2d") return 100;
  if (name == "minigrid-memory" || name == "minigrid-crossing") return 100;
  if (name == "chain") return 20;
  throw ConfigError("unknown environment '" + name + "'");
}

int resolve_max_steps(const EnvConfig& config, const std::string& domain) {
  if (config.max_steps < 0) throw ConfigError("max_steps must be positive");
  return config.max_steps > 0 ? config.max_steps : default_max_steps(domain);
}

std::vector<std::string> environment_names() {
  return {"car-flag", "bumps-1d", "bumps-2d", "minigrid-memory", "minigrid-crossing", "chain"};
}

std::unique_ptr<Environment> make_environment(const EnvConfig& config) {
  const std::string& n = config.name;
  if (n == "car-flag") return std::make_unique<CarFlag>(config);
  if (n == "bumps-1d") return std::make_unique<Bumps1D>(config);
  if (n == "bumps-2d") return std::make_unique<Bumps2D>(config);
  if (n == "minigrid-memory") return std::make_unique<MemoryEnv>(config);
  if (n == "minigrid-crossing") return std::make_unique<CrossingEnv>(config);
  if (n == "chain") return std::make_unique<Chain>(config);
  throw ConfigError("unknown environment '" + n + "'");
}

}  // namespace cosil::env
