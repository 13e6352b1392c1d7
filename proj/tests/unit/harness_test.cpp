#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cosil/errors.hpp"
#include "cosil/harness/config.hpp"
#include "cosil/harness/grid.hpp"
#include "cosil/harness/metrics.hpp"
#include "cosil/harness/plot.hpp"
#include "cosil/harness/training.hpp"

namespace cosil::harness {
namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fresh scratch directory per test, removed afterwards.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name)
      : path_((fs::temp_directory_path() / ("cosil_harness_" + name + "_" + std::to_string(::getpid()))).string()) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() { fs::remove_all(path_); }
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return (fs::path(path_) / name).string(); }

 private:
  std::string path_;
};

/// Small chain run that finishes in well under a second.
RunConfig chain_config(const std::string& out_dir, const std::string& agent = "sac") {
  RunConfig c = parse_run_config(parse_key_values("env = chain\n"
                                                  "agent = " + agent + "\n"
                                                  "hidden = 4\nhead_width = 8\nobs_embed = 4\naction_embed = 2\n"
                                                  "batch_size = 4\nwarmup_steps = 40\ntotal_steps = 200\n"
                                                  "eval_interval = 50\neval_episodes = 3\nseeds = 0\n"));
  c.out_dir = out_dir;
  return c;
}

// ---------------------------------------------------------------- config

TEST(ConfigTest, ParsesCommentsAndWhitespace) {
  const auto kv = parse_key_values("# header\n  env = car-flag   # trailing\n\nseeds = 1, 2 ,3\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0].first, "env");
  EXPECT_EQ(kv[0].second, "car-flag");
  const auto c = parse_run_config(kv);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
}

TEST(ConfigTest, ReportsLineOfBadEntry) {
  try {
    parse_key_values("env = chain\nno equals sign\n", "f.conf");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("f.conf:2"), std::string::npos);
  }
}

TEST(ConfigTest, RejectsUnknownKeysAndBadValues) {
  RunConfig c;
  EXPECT_THROW(apply_key(c, "learning_rate", "1"), ConfigError);
  EXPECT_THROW(apply_key(c, "gamma", "0.9x"), ConfigError);
  EXPECT_THROW(apply_key(c, "total_steps", "-5"), ConfigError);
  EXPECT_THROW(apply_key(c, "trace", "maybe"), ConfigError);
  EXPECT_THROW(apply_key(c, "alpha_schedule", "cosine"), ConfigError);
}

TEST(ConfigTest, InvariantsChecked) {
  EXPECT_THROW(parse_run_config(parse_key_values("env = chain\nseeds = 1, 1\n")), ConfigError);
  EXPECT_THROW(parse_run_config(parse_key_values("env = chain\ngamma = 0\n")), ConfigError);
  EXPECT_THROW(parse_run_config(parse_key_values("env = chain\ngamma = 1.01\n")), ConfigError);
  EXPECT_NO_THROW(parse_run_config(parse_key_values("env = chain\ngamma = 1\n")));
  EXPECT_THROW(parse_run_config(parse_key_values("agent = sac\n")), ConfigError);
}

TEST(ConfigTest, Defaults) {
  const RunConfig c;
  EXPECT_EQ(c.eval_episodes, 10u);
  EXPECT_EQ(c.seeds.size(), 4u);
  EXPECT_EQ(c.agent.gamma, 0.99);
  EXPECT_EQ(c.agent.actor_lr, 3e-4);
  EXPECT_EQ(c.agent.critic_lr, 3e-4);
  EXPECT_EQ(c.agent.alpha_lr, 3e-4);
}

TEST(ConfigTest, MarkovSacDropsRecurrence) {
  const auto c = parse_run_config(parse_key_values("env = chain\nagent = markov_sac\n"));
  EXPECT_EQ(c.agent.algorithm, agents::Algorithm::kSac);
  EXPECT_EQ(c.agent.net.hidden, 0u);
}

TEST(ConfigTest, AlphaSchedules) {
  RunConfig c;
  apply_key(c, "alpha_schedule", "fixed:0.3");
  EXPECT_EQ(c.agent.alpha_mode, agents::AlphaMode::kFixed);
  EXPECT_EQ(c.agent.alpha_init, 0.3);
  apply_key(c, "alpha_schedule", "linear");
  EXPECT_EQ(c.agent.alpha_mode, agents::AlphaMode::kLinearDecay);
  EXPECT_EQ(c.agent.alpha_init, 1.0);
  apply_key(c, "alpha_schedule", "exponential");
  EXPECT_EQ(c.agent.alpha_mode, agents::AlphaMode::kExponentialDecay);
  apply_key(c, "alpha_schedule", "adaptive");
  EXPECT_FALSE(c.agent.alpha_mode.has_value());
  EXPECT_THROW(apply_key(c, "alpha_schedule", "fixed"), ConfigError);
}

TEST(ConfigTest, TextFormRoundTrips) {
  RunConfig c = parse_run_config(parse_key_values(
      "env = bumps-2d\nenv.penalty = 1\nagent = adv_off\nalpha_mode = entropy\ntarget_entropy = -0.5\n"
      "seeds = 3, 9\nlr = 1e-3\nmax_len = 64\ntrace = false\nname = x/y\n"));
  const std::string text = to_text(c);
  const RunConfig back = parse_run_config(parse_key_values(text));
  EXPECT_EQ(to_text(back), text);
  EXPECT_EQ(back.env.params.at("penalty"), 1.0);
  EXPECT_EQ(back.agent.actor_lr, 1e-3);
  EXPECT_EQ(back.agent.critic_lr, 1e-3);
  EXPECT_EQ(back.agent.target_entropy, -0.5);
  EXPECT_FALSE(back.trace);
}

TEST(ConfigTest, GridCellsAreCartesianLastAxisFastest) {
  const auto spec = parse_grid_spec(
      parse_key_values("base = a.conf\nname = sweep\ngrid.target_divergence = 0.5, 0.7\ngrid.tau = 0.01, 0.02, 0.03\n"),
      "/cfg");
  EXPECT_EQ(spec.base_path, "/cfg/a.conf");
  ASSERT_EQ(spec.base_overrides.size(), 1u);
  const auto cells = spec.cells();
  ASSERT_EQ(cells.size(), 6u);
  EXPECT_EQ(cells[0], (KeyValues{{"target_divergence", "0.5"}, {"tau", "0.01"}}));
  EXPECT_EQ(cells[1], (KeyValues{{"target_divergence", "0.5"}, {"tau", "0.02"}}));
  EXPECT_EQ(cells[5], (KeyValues{{"target_divergence", "0.7"}, {"tau", "0.03"}}));
  EXPECT_EQ(spec.cells(), cells);
  EXPECT_THROW(parse_grid_spec(parse_key_values("grid.tau = 1\n"), "."), ConfigError);
}

TEST(ConfigTest, OutDirEnvironmentOverride) {
  RunConfig c;
  c.out_dir = "configured";
  ::unsetenv("COSIL_OUT_DIR");
  EXPECT_EQ(output_root(c), "configured");
  ::setenv("COSIL_OUT_DIR", "/elsewhere", 1);
  EXPECT_EQ(output_root(c), "/elsewhere");
  ::unsetenv("COSIL_OUT_DIR");
}

// ---------------------------------------------------------------- metrics

TEST(MetricsTest, RowsRoundTripAndMustIncrease) {
  ScratchDir dir("metrics");
  const std::string stem = dir.file("m");
  {
    MetricsWriter w(stem);
    w.append({7, 0, -1.5, 0.0, std::nan(""), 1.0, std::nan(""), std::nan(""), 0.25});
    w.append({7, 10, 0.1 + 0.2, 0.5, 0.7, 0.3, 1e-300, -2.0, 0.5});
    EXPECT_THROW(w.append({7, 10, 0, 0, 0, 0, 0, 0, 0}), UsageError);
  }
  const auto rows = read_metrics(stem + ".csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(std::isnan(rows[0].divergence));
  EXPECT_EQ(rows[1].eval_return, 0.1 + 0.2);
  EXPECT_EQ(rows[1].actor_loss, 1e-300);
  EXPECT_EQ(slurp(stem + ".csv").substr(0, std::string(kMetricsHeader).size()), kMetricsHeader);
  EXPECT_NE(slurp(stem + ".timing.csv").find("0.5"), std::string::npos);
}

// ---------------------------------------------------------------- train / evaluate

TEST(TrainTest, ZeroStepsGivesOnlyInitialRow) {
  ScratchDir dir("zero");
  RunConfig c = chain_config(dir.path());
  c.total_steps = 0;
  const auto r = train(c, 0);
  EXPECT_FALSE(r.failed);
  const auto rows = read_metrics(r.paths.metrics());
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].step, 0u);
  EXPECT_TRUE(fs::exists(r.paths.checkpoint()));
}

TEST(TrainTest, RowsAtIntervalsAndEnd) {
  ScratchDir dir("rows");
  RunConfig c = chain_config(dir.path());
  c.total_steps = 130;
  const auto rows = read_metrics(train(c, 0).paths.metrics());
  std::vector<std::uint64_t> steps;
  for (const auto& r : rows) steps.push_back(r.step);
  EXPECT_EQ(steps, (std::vector<std::uint64_t>{0, 50, 100, 130}));
}

TEST(TrainTest, SameConfigAndSeedGiveIdenticalFiles) {
  ScratchDir a("det_a"), b("det_b");
  const auto ra = train(chain_config(a.path(), "cosil"), 3);
  const auto rb = train(chain_config(b.path(), "cosil"), 3);
  EXPECT_EQ(slurp(ra.paths.metrics()), slurp(rb.paths.metrics()));
  EXPECT_EQ(slurp(ra.paths.trace()), slurp(rb.paths.trace()));
  EXPECT_EQ(load_checkpoint(ra.paths.checkpoint()).agent_blob, load_checkpoint(rb.paths.checkpoint()).agent_blob);
  ScratchDir c("det_c");
  const auto rc = train(chain_config(c.path(), "cosil"), 4);
  EXPECT_NE(slurp(ra.paths.trace()), slurp(rc.paths.trace()));
}

TEST(TrainTest, EvaluationDoesNotDisturbTraining) {
  ScratchDir a("iso_a"), b("iso_b");
  RunConfig often = chain_config(a.path()), rarely = chain_config(b.path());
  often.eval_interval = 7;
  rarely.eval_interval = 1000;
  const auto ra = train(often, 1), rb = train(rarely, 1);
  EXPECT_EQ(slurp(ra.paths.trace()), slurp(rb.paths.trace()));
  EXPECT_EQ(load_checkpoint(ra.paths.checkpoint()).agent_blob, load_checkpoint(rb.paths.checkpoint()).agent_blob);
  EXPECT_EQ(ra.final_eval.mean_return, rb.final_eval.mean_return);
}

TEST(TrainTest, NonFiniteLossMarksRunFailed) {
  ScratchDir dir("diverge");
  RunConfig c = chain_config(dir.path());
  c.agent.critic_lr = 1e300;
  c.agent.actor_lr = 1e300;
  const auto r = train(c, 0);
  EXPECT_TRUE(r.failed);
  EXPECT_FALSE(fs::exists(r.paths.checkpoint()));
  EXPECT_GE(read_metrics(r.paths.metrics()).size(), 1u);
  EXPECT_NE(slurp(r.paths.meta()).find("\"failed\""), std::string::npos);
}

TEST(TrainTest, TraceLogsEveryUpdate) {
  ScratchDir dir("trace");
  RunConfig c = chain_config(dir.path());
  c.update_every = 3;
  const auto r = train(c, 0);
  const auto trace = read_trace(r.paths.trace());
  ASSERT_EQ(trace.size(), r.updates);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    EXPECT_EQ(trace[i].update, i + 1);
    EXPECT_EQ(trace[i].step % 3, 0u);
    EXPECT_GT(trace[i].step, c.warmup_steps);
  }
}

TEST(TrainTest, LinearDecayIsHalfAtHalfHorizon) {
  ScratchDir dir("linear");
  RunConfig c = chain_config(dir.path(), "cosil");
  apply_key(c, "alpha_schedule", "linear");
  const auto trace = read_trace(train(c, 0).paths.trace());
  bool seen = false;
  for (const auto& t : trace) {
    EXPECT_EQ(t.alpha, 1.0 - static_cast<double>(t.step) / 200.0);
    if (t.step == 100) {
      EXPECT_EQ(t.alpha, 0.5);
      seen = true;
    }
  }
  EXPECT_TRUE(seen);
}

TEST(TrainTest, FixedZeroAlphaCosilMatchesEntropyFreeSac) {
  ScratchDir a("zero_cosil"), b("zero_sac");
  RunConfig cosil = chain_config(a.path(), "cosil"), sac = chain_config(b.path(), "sac");
  apply_key(cosil, "alpha_schedule", "fixed:0");
  apply_key(sac, "alpha_schedule", "fixed:0");
  const auto ra = train(cosil, 2), rb = train(sac, 2);
  const auto ta = read_trace(ra.paths.trace()), tb = read_trace(rb.paths.trace());
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    EXPECT_EQ(ta[i].actor_loss, tb[i].actor_loss);
    EXPECT_EQ(ta[i].critic_loss, tb[i].critic_loss);
  }
  const auto ma = read_metrics(ra.paths.metrics()), mb = read_metrics(rb.paths.metrics());
  ASSERT_EQ(ma.size(), mb.size());
  for (std::size_t i = 0; i < ma.size(); ++i) EXPECT_EQ(ma[i].eval_return, mb[i].eval_return);
}

TEST(EvaluateTest, ExpertSolvesCarFlag) {
  env::EnvConfig e;
  e.name = "car-flag";
  EXPECT_EQ(evaluate_expert(e, 100, 1000).success_rate, 1.0);
}

TEST(EvaluateTest, RandomRarelySolvesBumps2D) {
  env::EnvConfig e;
  e.name = "bumps-2d";
  const auto r = evaluate_random(e, 100, 1000, 0);
  EXPECT_LT(r.success_rate, 0.5);
  EXPECT_EQ(r.episodes, 100u);
}

TEST(EvaluateTest, CheckpointEvaluationIsRepeatableAndMatchesTraining) {
  ScratchDir dir("ckpt");
  RunConfig c = chain_config(dir.path());
  const auto r = train(c, 5);
  const auto a = evaluate_checkpoint(r.paths.checkpoint(), c.eval_episodes);
  const auto b = evaluate_checkpoint(r.paths.checkpoint(), c.eval_episodes);
  EXPECT_EQ(a.mean_return, b.mean_return);
  EXPECT_EQ(a.success_rate, b.success_rate);
  EXPECT_EQ(a.mean_return, r.final_eval.mean_return);
  const Checkpoint ck = load_checkpoint(r.paths.checkpoint());
  EXPECT_EQ(ck.seed, 5u);
  EXPECT_EQ(ck.steps, c.total_steps);
  EXPECT_EQ(to_text(ck.config), to_text(c));
}

TEST(EvaluateTest, ActionSpaceMismatchIsConfigError) {
  ScratchDir dir("mismatch");
  const auto r = train(chain_config(dir.path()), 0);
  agents::Agent agent = restore_agent(load_checkpoint(r.paths.checkpoint()));
  env::EnvConfig other;
  other.name = "car-flag";
  EXPECT_THROW(evaluate(agent, other, 1, 0), ConfigError);
}

TEST(EvaluateTest, RejectsCorruptCheckpoint) {
  ScratchDir dir("corrupt");
  std::ofstream(dir.file("bad.ckpt")) << "not a checkpoint";
  EXPECT_THROW(load_checkpoint(dir.file("bad.ckpt")), ValidationError);
}

TEST(GapTest, SamePolicyHasZeroGap) {
  ScratchDir dir("gap");
  const auto r = train(chain_config(dir.path()), 0);
  const auto g = optimality_gap("chain", r.paths.checkpoint(), r.paths.checkpoint(), 100, 7);
  EXPECT_EQ(g.gap, 0.0);
  EXPECT_EQ(g.episodes, 100u);
  EXPECT_THROW(optimality_gap("chain", r.paths.checkpoint(), r.paths.checkpoint(), 99, 7), ConfigError);
  EXPECT_THROW(optimality_gap("car-flag", r.paths.checkpoint(), r.paths.checkpoint(), 100, 7), ConfigError);
}

// ---------------------------------------------------------------- grid

void write_base(const ScratchDir& dir) {
  std::ofstream(dir.file("base.conf")) << "name = sweep\nenv = chain\nagent = sac\nhidden = 4\nhead_width = 8\n"
                                          "obs_embed = 4\naction_embed = 2\nbatch_size = 4\nwarmup_steps = 40\n"
                                          "total_steps = 120\neval_interval = 60\neval_episodes = 2\nseeds = 0, 1\n"
                                       << "out_dir = " << dir.file("out") << "\n";
}

TEST(GridTest, SingleCellMatchesPlainTrain) {
  ScratchDir dir("grid1");
  write_base(dir);
  std::ofstream(dir.file("grid.spec")) << "base = base.conf\n";
  const auto g = grid_search(load_grid_spec(dir.file("grid.spec")));
  ASSERT_EQ(g.ranked.size(), 1u);
  EXPECT_EQ(g.ranked[0].seeds_ok, 2u);

  RunConfig plain = load_run_config(dir.file("base.conf"));
  plain.name = "sweep/base";
  plain.out_dir = dir.file("plain");
  const auto r = train(plain, 1);
  EXPECT_EQ(slurp(r.paths.metrics()), slurp(dir.file("out/sweep/base/seed1.csv")));
}

TEST(GridTest, FailedCellsAreRecordedAndRankingIsRecomputable) {
  ScratchDir dir("grid2");
  write_base(dir);
  std::ofstream(dir.file("grid.spec")) << "base = base.conf\ngrid.gamma = 0.9, 5, 0.99\n";
  const auto spec = load_grid_spec(dir.file("grid.spec"));
  const auto g = grid_search(spec);
  ASSERT_EQ(g.ranked.size(), 3u);
  EXPECT_EQ(g.ranked.back().label, "gamma=5");
  EXPECT_EQ(g.ranked.back().seeds_failed, 2u);
  EXPECT_EQ(g.ranked.back().seeds_ok, 0u);
  EXPECT_GE(g.ranked[0].mean_final_return, g.ranked[1].mean_final_return);

  std::vector<CellRef> refs;
  for (const auto& cell : spec.cells()) {
    refs.push_back({cell_label(cell), dir.file("out/sweep/" + cell_label(cell)), {0, 1}});
  }
  EXPECT_EQ(summary_csv(rank_cells(refs)), slurp(g.summary_path));

  double sum = 0.0, sq = 0.0;
  for (const std::uint64_t s : {0, 1}) {
    const double v = read_metrics(dir.file("out/sweep/" + g.ranked[0].label + "/seed" + std::to_string(s) + ".csv"))
                         .back()
                         .eval_return;
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(g.ranked[0].mean_final_return, sum / 2, 1e-12);
  EXPECT_NEAR(g.ranked[0].sd_final_return, std::sqrt(std::max(0.0, sq / 2 - (sum / 2) * (sum / 2))), 1e-9);
}

// ---------------------------------------------------------------- plots

void write_metrics(const std::string& stem, std::uint64_t seed, const std::vector<std::pair<std::uint64_t, double>>& rows) {
  fs::create_directories(fs::path(stem).parent_path());
  MetricsWriter w(stem);
  for (const auto& [step, ret] : rows) w.append({seed, step, ret, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
}

TEST(PlotTest, SingleSeedHasZeroBand) {
  ScratchDir dir("plot1");
  write_metrics(dir.file("a/seed0"), 0, {{0, 1.0}, {10, 2.0}});
  const auto curves = build_curves({dir.file("a/seed0.csv")}, {});
  ASSERT_EQ(curves.size(), 1u);
  EXPECT_EQ(curves[0].sd, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(curves[0].mean, (std::vector<double>{1.0, 2.0}));
}

TEST(PlotTest, PopulationStandardDeviationBand) {
  ScratchDir dir("plot2");
  write_metrics(dir.file("a/seed0"), 0, {{0, 1.0}, {10, 1.0}});
  write_metrics(dir.file("a/seed1"), 1, {{0, 3.0}, {10, 3.0}});
  const auto curves = build_curves({dir.file("a/seed0.csv"), dir.file("a/seed1.csv")}, {});
  ASSERT_EQ(curves.size(), 1u);
  EXPECT_EQ(curves[0].mean, (std::vector<double>{2.0, 2.0}));
  EXPECT_EQ(curves[0].sd, (std::vector<double>{1.0, 1.0}));
  EXPECT_FALSE(curves[0].resampled);
}

TEST(PlotTest, MismatchedGridsResampleToCoarsest) {
  ScratchDir dir("plot3");
  write_metrics(dir.file("a/seed0"), 0, {{0, 0.0}, {10, 1.0}, {20, 2.0}, {30, 3.0}, {40, 4.0}});
  write_metrics(dir.file("a/seed1"), 1, {{0, 0.0}, {20, 2.0}, {40, 4.0}});
  const auto curves = build_curves({dir.file("a/seed0.csv"), dir.file("a/seed1.csv")}, {});
  ASSERT_EQ(curves.size(), 1u);
  EXPECT_TRUE(curves[0].resampled);
  EXPECT_EQ(curves[0].steps, (std::vector<double>{0, 20, 40}));
  EXPECT_EQ(curves[0].mean, (std::vector<double>{0, 2, 4}));
  const std::string svg = render_svg(curves, {});
  EXPECT_NE(svg.find("resampled"), std::string::npos);
}

TEST(PlotTest, OneCurvePerDirectoryAndByteIdenticalOutput) {
  ScratchDir dir("plot4");
  write_metrics(dir.file("runs/cosil/seed0"), 0, {{0, 0.0}, {10, 1.0}});
  write_metrics(dir.file("runs/dagger/seed0"), 0, {{0, 0.0}, {10, 0.5}});
  fs::copy_file(dir.file("runs/cosil/seed0.csv"), dir.file("runs/cosil/seed0.trace.csv"));
  const auto files = glob_metrics(dir.path() + "/runs/**/seed*.csv");
  ASSERT_EQ(files.size(), 2u);
  PlotOptions opt;
  opt.random_line = -1.0;
  opt.expert_line = 1.5;
  const auto first = emit_plots(files, dir.file("plots/a"), opt);
  const auto second = emit_plots(files, dir.file("plots/b"), opt);
  ASSERT_EQ(first.curves.size(), 2u);
  EXPECT_EQ(first.curves[0].label, "cosil");
  EXPECT_EQ(first.curves[1].label, "dagger");
  EXPECT_EQ(slurp(first.svg_path), slurp(second.svg_path));
  EXPECT_EQ(slurp(first.csv_path), slurp(second.csv_path));
  const std::string svg = slurp(first.svg_path);
  EXPECT_NE(svg.find("Random"), std::string::npos);
  EXPECT_NE(svg.find("Expert"), std::string::npos);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
}

TEST(PlotTest, SmoothingIsTrailingMean) {
  ScratchDir dir("plot5");
  write_metrics(dir.file("a/seed0"), 0, {{0, 0.0}, {1, 3.0}, {2, 6.0}});
  PlotOptions opt;
  opt.smoothing = 2;
  const auto curves = build_curves({dir.file("a/seed0.csv")}, opt);
  EXPECT_EQ(curves[0].mean, (std::vector<double>{0.0, 1.5, 4.5}));
}

TEST(PlotTest, ManyCurvesStayDistinctAndLegendFits) {
  std::vector<Curve> curves;
  for (int k = 0; k < 12; ++k) {
    Curve c;
    c.label = "a_rather_long_curve_label_" + std::to_string(k);
    c.steps = {0, 10};
    c.mean = {0.0, double(k)};
    c.sd = {0.0, 0.0};
    c.seeds = 1;
    curves.push_back(c);
  }
  const std::string svg = render_svg(curves, {});
  std::set<std::string> styles;
  for (std::size_t at = svg.find("<polyline"); at != std::string::npos; at = svg.find("<polyline", at + 1)) {
    const std::string tag = svg.substr(at, svg.find("/>", at) - at);
    const auto stroke = tag.find("stroke=");
    styles.insert(tag.substr(stroke));
  }
  EXPECT_EQ(styles.size(), 12u);
  const double width = std::stod(svg.substr(svg.find("width=\"") + 7));
  // Legend text starts right of the 500 px plot and needs ~7 px per glyph.
  EXPECT_GE(width, 70 + 500 + 36 + 7.0 * (curves[0].label.size() + 7));
}

// ------------------------------------------------------- shipped configs

TEST(ShippedConfigTest, EveryConfigAndGridParses) {
  int files = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(COSIL_SOURCE_DIR) / "configs")) {
    const auto path = entry.path().string();
    if (entry.path().extension() == ".conf") {
      EXPECT_NO_THROW(load_run_config(path).validate()) << path;
      ++files;
    } else if (entry.path().extension() == ".grid") {
      const auto spec = load_grid_spec(path);
      EXPECT_GT(spec.cells().size(), 1u) << path;
      for (const auto& cell : spec.cells()) EXPECT_NO_THROW(cell_config(spec, cell).validate()) << path;
      ++files;
    }
  }
  EXPECT_GE(files, 4);
}

}  // namespace
}  // namespace cosil::harness
