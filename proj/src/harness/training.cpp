#include "cosil/harness/training.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <random>
#include <sstream>

#include "cosil/autodiff/params.hpp"
#include "cosil/errors.hpp"
#include "cosil/replay/replay.hpp"

namespace cosil::harness {
namespace {

constexpr char kCheckpointMagic[8] = {'C', 'O', 'S', 'I', 'L', 'C', 'K', '\0'};
constexpr std::uint64_t kCheckpointVersion = 1;

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), 0x68617273u};
  return std::mt19937_64(seq);
}

env::Action random_action(const env::ActionSpace& space, std::mt19937_64& rng) {
  if (space.is_discrete()) {
    return {static_cast<double>(std::uniform_int_distribution<std::size_t>(0, space.n - 1)(rng))};
  }
  env::Action a(space.dim);
  for (std::size_t k = 0; k < space.dim; ++k) a[k] = std::uniform_real_distribution<double>(space.low[k], space.high[k])(rng);
  return a;
}

/// Running means of update statistics between evaluation rows.
struct Window {
  double divergence = 0.0, actor = 0.0, critic = 0.0;
  std::size_t n = 0;

  void add(const agents::UpdateStats& s) {
    divergence += s.divergence;
    actor += s.actor_loss;
    critic += s.critic_loss;
    ++n;
  }
  double mean(double total) const { return n == 0 ? std::numeric_limits<double>::quiet_NaN() : total / n; }
};

template <typename Policy>
EvalResult rollouts(const env::EnvConfig& env_config, std::size_t episodes, std::uint64_t seed_base, Policy policy) {
  auto environment = env::make_environment(env_config);
  EvalResult out;
  double total_return = 0.0, successes = 0.0;
  for (std::size_t i = 0; i < episodes; ++i) {
    auto step = environment->reset(seed_base + i);
    auto state = policy.begin();
    double ret = 0.0;
    bool success = false;
    while (!step.done) {
      const env::Action a = policy(state, step);
      step = environment->step(a);
      ret += step.reward;
      success = success || step.success;
    }
    total_return += ret;
    successes += success ? 1.0 : 0.0;
  }
  out.episodes = episodes;
  out.mean_return = episodes == 0 ? 0.0 : total_return / static_cast<double>(episodes);
  out.success_rate = episodes == 0 ? 0.0 : successes / static_cast<double>(episodes);
  return out;
}

/// Deterministic agent rollout policy carrying (hidden, previous action).
struct AgentPolicy {
  agents::Agent& agent;
  struct State {
    ad::Tensor hidden;
    std::vector<double> prev;
  };
  State begin() const { return {agent.initial_hidden(), std::vector<double>(agent.action_space().encoding_width(), 0.0)}; }
  env::Action operator()(State& s, const env::StepResult& step) {
    auto r = agent.act(step.observation, s.prev, s.hidden, true);
    s.hidden = std::move(r.hidden);
    std::fill(s.prev.begin(), s.prev.end(), 0.0);
    agent.action_space().encode(r.action, s.prev);
    return r.action;
  }
};

void check_compatible(const agents::Agent& agent, const env::Environment& environment) {
  const auto space = environment.action_space();
  const auto& mine = agent.action_space();
  if (space.kind != mine.kind || space.n != mine.n || space.dim != mine.dim || space.low != mine.low ||
      space.high != mine.high || environment.observation_dim() != agent.obs_dim()) {
    throw ConfigError("agent and environment '" + environment.name() + "' disagree on observation or action space");
  }
}

void write_meta(const RunPaths& paths, const RunConfig& config, std::uint64_t seed, const TrainResult& result) {
  nlohmann::json meta;
  meta["name"] = config.name;
  meta["seed"] = seed;
  meta["env"] = config.env.name;
  meta["agent"] = agents::to_string(config.agent.algorithm);
  meta["alpha_schedule"] = config.alpha_schedule.empty() ? "default" : config.alpha_schedule;
  meta["status"] = result.failed ? "failed" : "ok";
  if (result.failed) meta["error"] = result.error;
  meta["steps"] = result.steps;
  meta["updates"] = result.updates;
  meta["config"] = to_text(config);
  std::ofstream out(paths.meta(), std::ios::trunc);
  out << meta.dump(2) << "\n";
}

}  // namespace

RunPaths run_paths(const RunConfig& config, std::uint64_t seed) {
  RunPaths p;
  p.dir = (std::filesystem::path(output_root(config)) / config.name).string();
  p.stem = (std::filesystem::path(p.dir) / ("seed" + std::to_string(seed))).string();
  return p;
}

TrainResult train(const RunConfig& config, std::uint64_t seed, const UpdateHook& hook) {
  config.validate();
  TrainResult result;
  result.paths = run_paths(config, seed);
  std::filesystem::create_directories(result.paths.dir);

  env::EnvConfig env_config = config.env;
  env_config.seed = seed;
  auto environment = env::make_environment(env_config);
  const auto space = environment->action_space();
  const auto dims = replay::Dims::of(*environment);
  agents::Agent agent(config.agent, environment->observation_dim(), space, seed);
  replay::ReplayBuffer buffer(space, dims, config.replay_capacity);
  const std::size_t window = config.max_len == 0 ? static_cast<std::size_t>(environment->max_steps()) : config.max_len;
  const env::Environment& expert_env = *environment;
  const agents::ExpertFn expert = [&expert_env](std::span<const double> s) { return expert_env.expert_action(s); };

  auto episode_rng = stream(seed, 4);
  auto warmup_rng = stream(seed, 5);
  auto sample_rng = stream(seed, 6);

  MetricsWriter metrics(result.paths.stem);
  std::unique_ptr<TraceWriter> trace;
  if (config.trace) trace = std::make_unique<TraceWriter>(result.paths.stem);
  const auto started = std::chrono::steady_clock::now();
  Window win;
  std::uint64_t step = 0;

  auto eval_row = [&] {
    const EvalResult e = evaluate(agent, config.env, config.eval_episodes, config.eval_seed_base);
    MetricRow row;
    row.seed = seed;
    row.step = step;
    row.eval_return = e.mean_return;
    row.eval_success = e.success_rate;
    row.divergence = win.mean(win.divergence);
    row.alpha = agent.alpha().value();
    row.actor_loss = win.mean(win.actor);
    row.critic_loss = win.mean(win.critic);
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    metrics.append(row);
    if (trace) trace->flush();
    win = Window{};
    result.final_eval = e;
  };

  try {
    eval_row();
    while (step < config.total_steps) {
      replay::EpisodeBuilder builder(space, dims);
      auto current = environment->reset(episode_rng());
      builder.begin(current);
      ad::Tensor hidden = agent.initial_hidden();
      while (!current.done && step < config.total_steps) {
        auto acted = agent.act(current.observation, builder.prev_action(), hidden, false);
        hidden = std::move(acted.hidden);
        const env::Action action = step < config.warmup_steps ? random_action(space, warmup_rng) : acted.action;
        current = environment->step(action);
        builder.add(action, current);
        ++step;

        if (step > config.warmup_steps && step % config.update_every == 0 && buffer.episodes() > 0) {
          const auto batch = buffer.sample(config.batch_size, window, sample_rng);
          const auto stats = agent.update(*batch, expert, agents::Progress{step, config.total_steps});
          win.add(stats);
          if (trace) {
            trace->append({agent.updates(), step, stats.divergence, stats.alpha, stats.entropy, stats.actor_loss,
                           stats.critic_loss});
          }
          if (hook) hook(step, stats);
        }
        if (step % config.eval_interval == 0) eval_row();
      }
      if (!builder.empty()) buffer.push(builder.finish());
    }
    if (config.total_steps % config.eval_interval != 0) eval_row();
  } catch (const TrainingDivergence& e) {
    result.failed = true;
    result.error = e.what();
  }
  result.steps = step;
  result.updates = agent.updates();
  if (!result.failed) save_checkpoint(result.paths.checkpoint(), config, seed, step, agent);
  write_meta(result.paths, config, seed, result);
  return result;
}

EvalResult evaluate(agents::Agent& agent, const env::EnvConfig& env_config, std::size_t episodes,
                    std::uint64_t seed_base) {
  check_compatible(agent, *env::make_environment(env_config));
  return rollouts(env_config, episodes, seed_base, AgentPolicy{agent});
}

EvalResult evaluate_expert(const env::EnvConfig& env_config, std::size_t episodes, std::uint64_t seed_base) {
  auto oracle = env::make_environment(env_config);
  struct Expert {
    const env::Environment& env;
    int begin() const { return 0; }
    env::Action operator()(int&, const env::StepResult& step) const { return env.expert_action(step.privileged_state); }
  };
  return rollouts(env_config, episodes, seed_base, Expert{*oracle});
}

EvalResult evaluate_random(const env::EnvConfig& env_config, std::size_t episodes, std::uint64_t seed_base,
                           std::uint64_t action_seed) {
  const auto space = env::make_environment(env_config)->action_space();
  struct Random {
    env::ActionSpace space;
    std::mt19937_64 rng;
    int begin() const { return 0; }
    env::Action operator()(int&, const env::StepResult&) { return random_action(space, rng); }
  };
  return rollouts(env_config, episodes, seed_base, Random{space, stream(action_seed, 7)});
}

void save_checkpoint(const std::string& path, const RunConfig& config, std::uint64_t seed, std::uint64_t steps,
                     const agents::Agent& agent) {
  std::ostringstream blob;
  agent.save(blob);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write checkpoint " + path);
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    ad::io::write_u64(out, kCheckpointVersion);
    ad::io::write_string(out, to_text(config));
    ad::io::write_u64(out, seed);
    ad::io::write_u64(out, steps);
    ad::io::write_string(out, blob.str());
    if (!out) throw ConfigError("failed writing checkpoint " + path);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + 8, kCheckpointMagic)) throw ValidationError(path + " is not a checkpoint");
  if (ad::io::read_u64(in) != kCheckpointVersion) throw ValidationError(path + ": unsupported checkpoint version");
  Checkpoint c;
  c.config = parse_run_config(parse_key_values(ad::io::read_string(in), path));
  c.seed = ad::io::read_u64(in);
  c.steps = ad::io::read_u64(in);
  c.agent_blob = ad::io::read_string(in);
  return c;
}

agents::Agent restore_agent(const Checkpoint& checkpoint) {
  env::EnvConfig env_config = checkpoint.config.env;
  env_config.seed = checkpoint.seed;
  auto environment = env::make_environment(env_config);
  agents::Agent agent(checkpoint.config.agent, environment->observation_dim(), environment->action_space(),
                      checkpoint.seed);
  std::istringstream blob(checkpoint.agent_blob);
  agent.load(blob);
  return agent;
}

EvalResult evaluate_checkpoint(const std::string& path, std::size_t episodes) {
  const Checkpoint c = load_checkpoint(path);
  agents::Agent agent = restore_agent(c);
  return evaluate(agent, c.config.env, episodes, c.config.eval_seed_base);
}

GapEstimate optimality_gap(agents::Agent& coil, agents::Agent& best, const env::EnvConfig& env_config,
                           std::size_t episodes, std::uint64_t seed_base) {
  if (episodes < 100) throw ConfigError("optimality gap needs at least 100 episodes");
  GapEstimate g;
  g.episodes = episodes;
  g.coil_return = evaluate(coil, env_config, episodes, seed_base).mean_return;
  g.best_return = evaluate(best, env_config, episodes, seed_base).mean_return;
  g.gap = g.best_return - g.coil_return;
  return g;
}

GapEstimate optimality_gap(const std::string& env_name, const std::string& coil_checkpoint,
                           const std::string& best_checkpoint, std::size_t episodes, std::uint64_t seed_base) {
  const Checkpoint a = load_checkpoint(coil_checkpoint), b = load_checkpoint(best_checkpoint);
  if (a.config.env.name != env_name || b.config.env.name != env_name) {
    throw ConfigError("checkpoints were not trained on '" + env_name + "'");
  }
  if (a.config.env.params != b.config.env.params || a.config.env.max_steps != b.config.env.max_steps) {
    throw ConfigError("checkpoints use different environment settings");
  }
  agents::Agent coil = restore_agent(a), best = restore_agent(b);
  return optimality_gap(coil, best, a.config.env, episodes, seed_base);
}

}  // namespace cosil::harness
