#include "cosil/harness/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cosil/errors.hpp"

namespace cosil::harness {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "' expects true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void apply_schedule(RunConfig& c, const std::string& v) {
  const auto colon = v.find(':');
  const std::string kind = v.substr(0, colon);
  const bool has_value = colon != std::string::npos;
  const double value = has_value ? to_double("alpha_schedule", v.substr(colon + 1)) : 1.0;
  if (kind == "adaptive") {
    c.agent.alpha_mode.reset();
    if (has_value) c.agent.alpha_init = value;
  } else if (kind == "fixed") {
    if (!has_value) throw ConfigError("alpha_schedule fixed needs a value, e.g. fixed:0.3");
    c.agent.alpha_mode = agents::AlphaMode::kFixed;
    c.agent.alpha_init = value;
  } else if (kind == "linear") {
    c.agent.alpha_mode = agents::AlphaMode::kLinearDecay;
    c.agent.alpha_init = value;
  } else if (kind == "exponential") {
    c.agent.alpha_mode = agents::AlphaMode::kExponentialDecay;
    c.agent.alpha_init = value;
  } else {
    throw ConfigError("unknown alpha_schedule '" + v + "' (adaptive, fixed:<a>, linear[:<a0>], exponential[:<a0>])");
  }
  c.alpha_schedule = v;
}

}  // namespace

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

KeyValues read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path);
}

void apply_key(RunConfig& c, const std::string& key, const std::string& v) {
  auto& a = c.agent;
  if (key.rfind("env.", 0) == 0) {
    c.env.params[key.substr(4)] = to_double(key, v);
  } else if (key == "name") {
    if (v.empty()) throw ConfigError("name must not be empty");
    c.name = v;
  } else if (key == "env") {
    c.env.name = v;
  } else if (key == "max_steps") {
    c.env.max_steps = static_cast<int>(to_u64(key, v));
  } else if (key == "agent") {
    a.algorithm = agents::parse_algorithm(v);
    if (v == "markov_sac") a.net.hidden = 0;
  } else if (key == "alpha_schedule") {
    apply_schedule(c, v);
  } else if (key == "alpha_mode") {
    a.alpha_mode = agents::parse_alpha_mode(v);
  } else if (key == "alpha_init") {
    a.alpha_init = to_double(key, v);
  } else if (key == "alpha_lr") {
    a.alpha_lr = to_double(key, v);
  } else if (key == "target_divergence") {
    a.target_divergence = to_double(key, v);
  } else if (key == "target_entropy") {
    a.target_entropy = to_double(key, v);
  } else if (key == "gamma") {
    a.gamma = to_double(key, v);
  } else if (key == "tau") {
    a.tau = to_double(key, v);
  } else if (key == "literal_soft_update") {
    a.literal_soft_update = to_bool(key, v);
  } else if (key == "lr") {
    a.actor_lr = a.critic_lr = to_double(key, v);
  } else if (key == "actor_lr") {
    a.actor_lr = to_double(key, v);
  } else if (key == "critic_lr") {
    a.critic_lr = to_double(key, v);
  } else if (key == "grad_clip") {
    a.grad_clip = to_double(key, v);
  } else if (key == "cosil_entropy") {
    a.cosil_entropy = to_bool(key, v);
  } else if (key == "appendix_sign") {
    a.appendix_sign = to_bool(key, v);
  } else if (key == "inverse_squash_expert") {
    a.inverse_squash_expert = to_bool(key, v);
  } else if (key == "bc_weight") {
    a.bc_weight = to_double(key, v);
  } else if (key == "bc_fraction") {
    a.bc_fraction = to_double(key, v);
  } else if (key == "advisor_temperature") {
    a.advisor_temperature = to_double(key, v);
  } else if (key == "obs_embed") {
    a.net.obs_embed = to_u64(key, v);
  } else if (key == "action_embed") {
    a.net.action_embed = to_u64(key, v);
  } else if (key == "hidden") {
    a.net.hidden = to_u64(key, v);
  } else if (key == "head_width") {
    a.net.head_width = to_u64(key, v);
  } else if (key == "total_steps") {
    c.total_steps = to_u64(key, v);
  } else if (key == "eval_interval") {
    c.eval_interval = to_u64(key, v);
  } else if (key == "eval_episodes") {
    c.eval_episodes = to_u64(key, v);
  } else if (key == "eval_seed_base") {
    c.eval_seed_base = to_u64(key, v);
  } else if (key == "seeds") {
    c.seeds.clear();
    for (const auto& s : split_list(v)) c.seeds.push_back(to_u64(key, s));
  } else if (key == "warmup_steps") {
    c.warmup_steps = to_u64(key, v);
  } else if (key == "update_every") {
    c.update_every = to_u64(key, v);
  } else if (key == "batch_size") {
    c.batch_size = to_u64(key, v);
  } else if (key == "max_len") {
    c.max_len = to_u64(key, v);
  } else if (key == "replay_capacity") {
    c.replay_capacity = to_u64(key, v);
  } else if (key == "out_dir") {
    c.out_dir = v;
  } else if (key == "trace") {
    c.trace = to_bool(key, v);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void RunConfig::validate() const {
  agent.validate();
  if (env.name.empty()) throw ConfigError("config needs 'env'");
  if (eval_interval == 0) throw ConfigError("eval_interval must be positive");
  if (eval_episodes == 0) throw ConfigError("eval_episodes must be positive");
  if (update_every == 0) throw ConfigError("update_every must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (replay_capacity == 0) throw ConfigError("replay_capacity must be positive");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::size_t j = i + 1; j < seeds.size(); ++j) {
      if (seeds[i] == seeds[j]) throw ConfigError("seeds must be distinct");
    }
  }
}

RunConfig parse_run_config(const KeyValues& kv) {
  RunConfig c;
  for (const auto& [k, v] : kv) apply_key(c, k, v);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_key_values(path)); }

std::string to_text(const RunConfig& c) {
  const auto& a = c.agent;
  std::ostringstream os;
  auto put = [&](const std::string& k, const std::string& v) { os << k << " = " << v << "\n"; };
  put("name", c.name);
  put("env", c.env.name);
  put("max_steps", std::to_string(c.env.max_steps));
  for (const auto& [k, v] : c.env.params) put("env." + k, num(v));
  put("agent", agents::to_string(a.algorithm));
  if (a.alpha_mode) put("alpha_mode", agents::to_string(*a.alpha_mode));
  put("alpha_init", num(a.alpha_init));
  put("alpha_lr", num(a.alpha_lr));
  put("target_divergence", num(a.target_divergence));
  if (a.target_entropy) put("target_entropy", num(*a.target_entropy));
  put("gamma", num(a.gamma));
  put("tau", num(a.tau));
  put("literal_soft_update", a.literal_soft_update ? "true" : "false");
  put("actor_lr", num(a.actor_lr));
  put("critic_lr", num(a.critic_lr));
  put("grad_clip", num(a.grad_clip));
  put("cosil_entropy", a.cosil_entropy ? "true" : "false");
  put("appendix_sign", a.appendix_sign ? "true" : "false");
  put("inverse_squash_expert", a.inverse_squash_expert ? "true" : "false");
  put("bc_weight", num(a.bc_weight));
  put("bc_fraction", num(a.bc_fraction));
  put("advisor_temperature", num(a.advisor_temperature));
  put("obs_embed", std::to_string(a.net.obs_embed));
  put("action_embed", std::to_string(a.net.action_embed));
  put("hidden", std::to_string(a.net.hidden));
  put("head_width", std::to_string(a.net.head_width));
  put("total_steps", std::to_string(c.total_steps));
  put("eval_interval", std::to_string(c.eval_interval));
  put("eval_episodes", std::to_string(c.eval_episodes));
  put("eval_seed_base", std::to_string(c.eval_seed_base));
  std::string seeds;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) seeds += (i ? ", " : "") + std::to_string(c.seeds[i]);
  put("seeds", seeds);
  put("warmup_steps", std::to_string(c.warmup_steps));
  put("update_every", std::to_string(c.update_every));
  put("batch_size", std::to_string(c.batch_size));
  put("max_len", std::to_string(c.max_len));
  put("replay_capacity", std::to_string(c.replay_capacity));
  put("out_dir", c.out_dir);
  put("trace", c.trace ? "true" : "false");
  return os.str();
}

std::vector<KeyValues> GridSpec::cells() const {
  std::vector<KeyValues> out{KeyValues{}};
  for (const auto& [key, values] : axes) {
    std::vector<KeyValues> next;
    for (const auto& partial : out) {
      for (const auto& v : values) {
        KeyValues cell = partial;
        cell.emplace_back(key, v);
        next.push_back(std::move(cell));
      }
    }
    out = std::move(next);
  }
  return out;
}

GridSpec parse_grid_spec(const KeyValues& kv, const std::string& origin_dir) {
  GridSpec g;
  for (const auto& [k, v] : kv) {
    if (k == "base") {
      std::filesystem::path p(v);
      g.base_path = p.is_absolute() ? v : (std::filesystem::path(origin_dir) / p).string();
    } else if (k.rfind("grid.", 0) == 0) {
      auto values = split_list(v);
      if (values.empty()) throw ConfigError("grid axis '" + k + "' has no values");
      g.axes.emplace_back(k.substr(5), std::move(values));
    } else {
      g.base_overrides.emplace_back(k, v);
    }
  }
  if (g.base_path.empty()) throw ConfigError("grid spec needs 'base = <config file>'");
  return g;
}

GridSpec load_grid_spec(const std::string& path) {
  return parse_grid_spec(read_key_values(path), std::filesystem::path(path).parent_path().string());
}

std::string output_root(const RunConfig& config) {
  if (const char* env = std::getenv("COSIL_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return config.out_dir;
}

}  // namespace cosil::harness
