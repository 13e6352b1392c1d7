// cosil: train, sweep, evaluate and plot recurrent SAC / COSIL agents.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "cosil/errors.hpp"
#include "cosil/harness/config.hpp"
#include "cosil/harness/grid.hpp"
#include "cosil/harness/plot.hpp"
#include "cosil/harness/training.hpp"

namespace h = cosil::harness;

namespace {

int run_train(const std::string& path, std::uint64_t seed, bool quiet) {
  const auto config = h::load_run_config(path);
  h::UpdateHook hook;
  std::uint64_t last_report = 0;
  if (!quiet) {
    hook = [&](std::uint64_t step, const cosil::agents::UpdateStats& s) {
      if (step - last_report < config.eval_interval) return;
      last_report = step;
      std::fprintf(stderr, "step %llu  divergence %.4f  alpha %.4g  actor %.4g  critic %.4g\n",
                   static_cast<unsigned long long>(step), s.divergence, s.alpha, s.actor_loss, s.critic_loss);
    };
  }
  const auto r = h::train(config, seed, hook);
  std::cout << "metrics    " << r.paths.metrics() << "\n";
  if (r.failed) {
    std::cout << "status     failed: " << r.error << "\n";
    return 2;
  }
  std::cout << "checkpoint " << r.paths.checkpoint() << "\n"
            << "final      return " << r.final_eval.mean_return << "  success " << r.final_eval.success_rate << "\n";
  return 0;
}

int run_grid(const std::string& path) {
  const auto spec = h::load_grid_spec(path);
  const auto result = h::grid_search(spec, [](const std::string& label, std::uint64_t seed) {
    std::fprintf(stderr, "cell %s seed %llu\n", label.c_str(), static_cast<unsigned long long>(seed));
  });
  std::cout << h::summary_csv(result.ranked) << "summary written to " << result.summary_path << "\n";
  return 0;
}

int run_eval(const std::string& checkpoint, std::size_t episodes) {
  const auto r = h::evaluate_checkpoint(checkpoint, episodes);
  std::cout << "episodes " << r.episodes << "\nmean_return " << h::format_double(r.mean_return)
            << "\nsuccess_rate " << h::format_double(r.success_rate) << "\n";
  return 0;
}

int run_plot(const std::string& pattern, std::string out, h::PlotOptions options, const std::string& env_name,
             std::size_t baseline_episodes) {
  const auto files = h::glob_metrics(pattern);
  if (files.empty()) throw cosil::ConfigError("no metrics files match '" + pattern + "'");
  if (!env_name.empty()) {
    cosil::env::EnvConfig env;
    env.name = env_name;
    const std::uint64_t base = h::RunConfig{}.eval_seed_base;
    if (!options.random_line) options.random_line = h::evaluate_random(env, baseline_episodes, base, 0).mean_return;
    if (!options.expert_line) options.expert_line = h::evaluate_expert(env, baseline_episodes, base).mean_return;
  }
  if (out.empty()) {
    h::RunConfig defaults;
    out = (std::filesystem::path(h::output_root(defaults)) / "plots" / "curves").string();
  }
  const auto r = h::emit_plots(files, out, options);
  for (const auto& c : r.curves) {
    std::cout << c.label << ": " << c.seeds << " seed(s), final mean " << h::format_double(c.mean.back()) << " sd "
              << h::format_double(c.sd.back()) << (c.resampled ? " (resampled to coarsest step grid)" : "") << "\n";
  }
  std::cout << "wrote " << r.svg_path << " and " << r.csv_path << "\n";
  return 0;
}

int run_gap(const std::string& env_name, const std::string& coil, const std::string& best, std::size_t episodes) {
  const auto g = h::optimality_gap(env_name, coil, best, episodes, h::RunConfig{}.eval_seed_base);
  nlohmann::json out;
  out["env"] = env_name;
  out["episodes"] = g.episodes;
  out["coil_checkpoint"] = coil;
  out["best_checkpoint"] = best;
  out["coil_return"] = g.coil_return;
  out["best_return"] = g.best_return;
  out["gap"] = g.gap;
  out["optimal_value_proxy"] = "best available partially observable agent: " + best;
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-observability soft imitation learning experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Train one seed of a configuration");
  train->add_option("--config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
  train->add_option("--seed", seed, "Run seed")->required();
  train->add_flag("--quiet", quiet, "No progress output");

  std::string spec_path;
  auto* grid = app.add_subcommand("grid", "Run every cell of a grid spec for every seed");
  grid->add_option("--spec", spec_path, "Grid spec file")->required()->check(CLI::ExistingFile);

  std::string checkpoint;
  std::size_t episodes = 10;
  auto* eval = app.add_subcommand("eval", "Deterministic evaluation of a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--episodes", episodes, "Evaluation episodes")->check(CLI::PositiveNumber);

  std::string pattern, out, env_name;
  h::PlotOptions options;
  std::size_t baseline_episodes = 100;
  double random_line = 0.0, expert_line = 0.0;
  auto* plot = app.add_subcommand("plot", "Learning curves (SVG) and a summary CSV from metrics files");
  plot->add_option("--glob", pattern, "Metrics file pattern, e.g. 'runs/carflag/**/seed*.csv'")->required();
  plot->add_option("--out", out, "Output stem (default <out root>/plots/curves)");
  plot->add_option("--title", options.title, "Plot title");
  plot->add_option("--metric", options.metric, "eval_return or eval_success");
  plot->add_option("--smooth", options.smoothing, "Moving-average window")->check(CLI::PositiveNumber);
  auto* random_opt = plot->add_option("--random", random_line, "Random baseline level");
  auto* expert_opt = plot->add_option("--expert", expert_line, "Expert level");
  plot->add_option("--env", env_name, "Compute Random and Expert levels on this environment");
  plot->add_option("--baseline-episodes", baseline_episodes, "Episodes for --env baselines");

  std::string coil, best;
  std::size_t gap_episodes = 100;
  auto* gap = app.add_subcommand("gap", "Optimality-gap estimate between two checkpoints");
  gap->add_option("--env", env_name, "Environment name")->required();
  gap->add_option("--coil", coil, "Imitation-only checkpoint")->required()->check(CLI::ExistingFile);
  gap->add_option("--best", best, "Best partially observable checkpoint")->required()->check(CLI::ExistingFile);
  gap->add_option("--episodes", gap_episodes, "Paired evaluation episodes (>= 100)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return run_train(config_path, seed, quiet);
    if (*grid) return run_grid(spec_path);
    if (*eval) return run_eval(checkpoint, episodes);
    if (*plot) {
      if (*random_opt) options.random_line = random_line;
      if (*expert_opt) options.expert_line = expert_line;
      return run_plot(pattern, out, options, env_name, baseline_episodes);
    }
    if (*gap) return run_gap(env_name, coil, best, gap_episodes);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
