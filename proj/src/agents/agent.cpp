#include "cosil/agents/agent.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstring>
#include <sstream>

#include "cosil/agents/divergence.hpp"
#include "cosil/autodiff/heads.hpp"
#include "cosil/errors.hpp"

namespace cosil::agents {
namespace {

using ad::Binding;
using ad::Tensor;
using ad::Var;

constexpr char kMagic[8] = {'C', 'O', 'S', 'I', 'L', 'A', 'G', '\0'};
constexpr std::uint64_t kVersion = 1;
const double kOpenBound = std::nextafter(1.0, 0.0);

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

void write_rng(std::ostream& os, const std::mt19937_64& rng) {
  std::ostringstream ss;
  ss << rng;
  ad::io::write_string(os, ss.str());
}

void read_rng(std::istream& is, std::mt19937_64& rng) {
  std::istringstream ss(ad::io::read_string(is));
  ss >> rng;
  if (!ss) throw ValidationError("bad generator state in checkpoint");
}

double masked_mean_value(const Tensor& x, const Tensor& mask, double n) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * mask[i];
  return s / n;
}

void require_finite(double v, const char* what, std::uint64_t update) {
  if (!std::isfinite(v)) {
    throw TrainingDivergence(std::string("non-finite ") + what + " at update " + std::to_string(update));
  }
}

}  // namespace

Algorithm parse_algorithm(const std::string& name) {
  if (name == "sac" || name == "markov_sac") return Algorithm::kSac;
  if (name == "cosil") return Algorithm::kCosil;
  if (name == "dagger") return Algorithm::kDagger;
  if (name == "bc_sac") return Algorithm::kBcSac;
  if (name == "bc2sac") return Algorithm::kBc2Sac;
  if (name == "adv_off") return Algorithm::kAdvOff;
  throw ConfigError("unknown agent '" + name + "' (sac, markov_sac, cosil, dagger, bc_sac, bc2sac, adv_off)");
}

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kSac: return "sac";
    case Algorithm::kCosil: return "cosil";
    case Algorithm::kDagger: return "dagger";
    case Algorithm::kBcSac: return "bc_sac";
    case Algorithm::kBc2Sac: return "bc2sac";
    case Algorithm::kAdvOff: return "adv_off";
  }
  return "sac";
}

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must be in [0, 1]");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0) || !(alpha_lr >= 0.0)) throw ConfigError("learning rates must be positive");
  if (!(grad_clip > 0.0)) throw ConfigError("grad_clip must be positive");
  if (!(bc_weight >= 0.0 && bc_weight <= 1.0)) throw ConfigError("bc_weight must be in [0, 1]");
  if (!(bc_fraction >= 0.0 && bc_fraction <= 1.0)) throw ConfigError("bc_fraction must be in [0, 1]");
  if (!(advisor_temperature > 0.0)) throw ConfigError("advisor_temperature must be positive");
  if (!(target_divergence >= 0.0)) throw ConfigError("target_divergence must be >= 0");
  if (!(alpha_init >= 0.0) || !std::isfinite(alpha_init)) throw ConfigError("alpha_init must be finite and >= 0");
}

bool bc2sac_in_bc_phase(std::uint64_t step, std::uint64_t total, double fraction) {
  return static_cast<double>(step) < fraction * static_cast<double>(total);
}

double advisor_weight(double divergence, double temperature) {
  return std::max(std::exp(-temperature * divergence), DBL_MIN);
}

Agent::Agent(const AgentConfig& config, std::size_t obs_dim, const env::ActionSpace& space, std::uint64_t seed)
    : config_(config), obs_dim_(obs_dim), space_(space) {
  config_.validate();
  if (obs_dim == 0) throw ConfigError("observation width must be positive");
  std::mt19937_64 init_rng = seeded(seed, 1);
  update_rng_ = seeded(seed, 2);
  act_rng_ = seeded(seed, 3);

  policy_ = PolicyNet(policy_store_, "policy", obs_dim, space_, config_.net, init_rng);
  for (int i = 0; i < 2; ++i) {
    critic_[i] = CriticNet(critic_store_[i], "critic" + std::to_string(i + 1), obs_dim, space_, config_.net, init_rng);
    target_store_[i] = critic_store_[i];
  }
  if (uses_il_policy()) il_policy_ = PolicyNet(il_store_, "il_policy", obs_dim, space_, config_.net, init_rng);

  policy_opt_ = ad::Adam(policy_store_, {.lr = config_.actor_lr});
  for (int i = 0; i < 2; ++i) critic_opt_[i] = ad::Adam(critic_store_[i], {.lr = config_.critic_lr});
  if (uses_il_policy()) il_opt_ = ad::Adam(il_store_, {.lr = config_.actor_lr});

  AlphaMode mode = AlphaMode::kEntropyTarget;
  if (config_.algorithm == Algorithm::kCosil) mode = AlphaMode::kDivergenceTarget;
  if (config_.algorithm == Algorithm::kDagger) mode = AlphaMode::kFixed;
  mode = config_.alpha_mode.value_or(mode);
  const double target = mode == AlphaMode::kDivergenceTarget ? config_.target_divergence
                                                             : config_.target_entropy.value_or(default_target_entropy());
  const double initial = config_.algorithm == Algorithm::kDagger && !config_.alpha_mode ? 0.0 : config_.alpha_init;
  alpha_ = AlphaState(mode, initial, target, config_.alpha_lr);
}

double Agent::default_target_entropy() const {
  if (space_.is_discrete()) return 0.7 * std::log(static_cast<double>(space_.n));
  return -static_cast<double>(space_.dim);
}

// Centre/half-width form keeps the (-1, 1) box an exact identity.
double Agent::to_unit(double a, std::size_t dim) const {
  const double mid = 0.5 * (space_.low[dim] + space_.high[dim]), half = 0.5 * (space_.high[dim] - space_.low[dim]);
  return (a - mid) / half;
}

double Agent::from_unit(double u, std::size_t dim) const {
  const double mid = 0.5 * (space_.low[dim] + space_.high[dim]), half = 0.5 * (space_.high[dim] - space_.low[dim]);
  return mid + u * half;
}

Tensor Agent::initial_hidden() const {
  if (!policy_.encoder().recurrent()) return Tensor();
  return Tensor({1, config_.net.hidden});
}

namespace {

struct ActHeads {
  std::vector<double> mean, log_std, logits;
  Tensor hidden;
};

ActHeads forward_one(const PolicyNet& policy, ad::ParamStore& store, std::size_t obs_dim,
                     std::size_t enc_width, std::span<const double> obs, std::span<const double> prev,
                     const Tensor& hidden) {
  if (obs.size() != obs_dim) throw ConfigError("observation width mismatch");
  if (prev.size() != enc_width) throw ConfigError("previous-action width mismatch");
  ad::Graph g;
  Binding bind{g, store, false};
  Var o = g.constant(Tensor({1, obs_dim}, std::vector<double>(obs.begin(), obs.end())));
  Var p = g.constant(Tensor({1, enc_width}, std::vector<double>(prev.begin(), prev.end())));
  Var h = policy.encoder().recurrent() ? g.constant(hidden) : Var{};
  const auto out = policy.step(bind, o, p, h);
  ActHeads r;
  if (policy.encoder().recurrent()) r.hidden = out.features.value();
  auto copy = [](Var v) { return std::vector<double>(v.value().values().begin(), v.value().values().end()); };
  if (out.logits.valid()) {
    r.logits = copy(out.logits);
  } else {
    r.mean = copy(out.mean);
    r.log_std = copy(out.log_std);
  }
  return r;
}

std::vector<double> softmax_row(const std::vector<double>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) z += (p[k] = std::exp(logits[k] - mx));
  for (double& v : p) v /= z;
  return p;
}

}  // namespace

std::vector<double> Agent::action_probabilities(std::span<const double> observation,
                                                std::span<const double> prev_action, const Tensor& hidden) {
  if (!space_.is_discrete()) throw UsageError("action probabilities are only defined for discrete actions");
  const auto heads = forward_one(policy_, policy_store_, obs_dim_, space_.encoding_width(), observation, prev_action, hidden);
  return softmax_row(heads.logits);
}

Agent::ActResult Agent::act(std::span<const double> observation, std::span<const double> prev_action,
                            const Tensor& hidden, bool deterministic) {
  auto heads = forward_one(policy_, policy_store_, obs_dim_, space_.encoding_width(), observation, prev_action, hidden);
  ActResult r;
  r.hidden = std::move(heads.hidden);
  if (space_.is_discrete()) {
    const auto probs = softmax_row(heads.logits);
    std::size_t a = 0;
    if (deterministic) {
      a = static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    } else {
      a = ad::sample_categorical(probs, std::uniform_real_distribution<double>(0.0, 1.0)(act_rng_));
    }
    r.action = {static_cast<double>(a)};
    return r;
  }
  r.action.resize(space_.dim);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < space_.dim; ++k) {
    if (!std::isfinite(heads.mean[k]) || !std::isfinite(heads.log_std[k])) {
      throw TrainingDivergence("non-finite policy output while acting");
    }
    double u = heads.mean[k];
    if (!deterministic) u += std::exp(std::clamp(heads.log_std[k], ad::kLogStdMin, ad::kLogStdMax)) * normal(act_rng_);
    // tanh rounds to exactly +-1 for large inputs; keep the open interval.
    const double squashed = std::clamp(std::tanh(u), -kOpenBound, kOpenBound);
    r.action[k] = std::clamp(from_unit(squashed, k), space_.low[k], space_.high[k]);
  }
  return r;
}

Tensor Agent::expert_targets(const replay::PaddedBatch& batch, const ExpertFn& expert, std::size_t rows) const {
  const std::size_t width = space_.encoding_width();
  Tensor out({rows, width});
  const std::size_t state_dim = batch.states.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = r / batch.batch, b = r % batch.batch;
    if (t > batch.lengths[b]) continue;
    const env::Action a = expert(std::span<const double>(batch.states.data() + r * state_dim, state_dim));
    if (space_.is_discrete()) {
      if (a.size() != 1 || a[0] < 0 || static_cast<std::size_t>(a[0]) >= space_.n) {
        throw ValidationError("expert returned an action outside the space");
      }
      out.at(r, static_cast<std::size_t>(a[0])) = 1.0;
    } else {
      if (a.size() != space_.dim) throw ValidationError("expert returned an action of the wrong width");
      for (std::size_t k = 0; k < width; ++k) out.at(r, k) = expert_target(to_unit(a[k], k), config_.inverse_squash_expert);
    }
  }
  return out;
}

double Agent::imitation_step(const replay::PaddedBatch& batch, const Tensor& expert_rows, std::size_t rows) {
  ad::Graph g;
  Binding bind{g, il_store_, true};
  Var obs = g.constant(batch.observations), prev = g.constant(batch.prev_actions);
  const auto out = il_policy_.forward(bind, ad::slice_rows(obs, 0, rows), ad::slice_rows(prev, 0, rows), batch.batch);
  Var e = g.constant(ad::Tensor({rows, expert_rows.cols()},
                                std::vector<double>(expert_rows.data(), expert_rows.data() + rows * expert_rows.cols())));
  Var d = space_.is_discrete() ? cross_entropy_divergence(e, ad::categorical_head(out.logits).log_probs)
                               : squared_divergence(e, out.mean);
  Var loss = ad::scale(ad::sum(ad::mul(d, g.constant(batch.mask))), 1.0 / batch.valid_steps());
  require_finite(loss.value().item(), "imitation loss", updates_);
  g.backward(loss);
  il_store_.clip_grad_norm(config_.grad_clip);
  il_opt_.step(il_store_);
  return loss.value().item();
}

UpdateStats Agent::build_and_backward(const replay::PaddedBatch& batch, const ExpertFn& expert, Progress progress) {
  const std::size_t B = batch.batch, T = batch.steps, N = T * B, N1 = N + B;
  if (B == 0 || T == 0) throw UsageError("empty batch");
  const double n_valid = batch.valid_steps();
  if (!(n_valid > 0)) throw UsageError("batch has no valid steps");
  const Algorithm alg = config_.algorithm;
  if (!expert && alg != Algorithm::kSac) throw UsageError(to_string(alg) + " needs an expert");

  alpha_.set_progress(progress.fraction());
  const double alpha = alpha_.value();
  const bool discrete = space_.is_discrete();
  const bool bc_phase = alg == Algorithm::kBc2Sac && bc2sac_in_bc_phase(progress.step, progress.total, config_.bc_fraction);
  const bool rl_actor = alg != Algorithm::kDagger && !bc_phase;

  UpdateStats stats;
  stats.alpha = alpha;
  stats.bc_phase = bc_phase;

  ad::Graph g;
  Var obs = g.constant(batch.observations), prev = g.constant(batch.prev_actions);
  Var mask = g.constant(batch.mask);
  auto mmean = [&](Var x) { return ad::scale(ad::sum(ad::mul(x, mask)), 1.0 / n_valid); };
  auto cur = [&](Var x) { return ad::slice_rows(x, 0, N); };
  auto nxt = [&](Var x) { return ad::slice_rows(x, B, N); };

  // Policy over current and successor rows.
  Binding pol{g, policy_store_, true};
  const auto out = policy_.forward(pol, obs, prev, B);
  Var action, entropy_pen, probs, divergence;
  Tensor expert_rows;
  if (expert) expert_rows = expert_targets(batch, expert, N1);
  if (discrete) {
    const auto cat = ad::categorical_head(out.logits);
    probs = cat.probs;
    entropy_pen = ad::row_sum(ad::mul(cat.probs, cat.log_probs));
    if (expert) divergence = cross_entropy_divergence(g.constant(expert_rows), cat.log_probs);
  } else {
    const auto sample = ad::gaussian_head_sample(out.mean, out.log_std, ad::standard_normal({N1, space_.dim}, update_rng_));
    action = sample.action;
    entropy_pen = sample.log_prob;
    if (expert) divergence = squared_divergence(g.constant(expert_rows), out.mean);
  }
  Var penalty = entropy_pen;
  if (alg == Algorithm::kCosil) {
    penalty = (!discrete && config_.appendix_sign) ? ad::neg(divergence) : divergence;
    if (config_.cosil_entropy) penalty = ad::add(penalty, entropy_pen);
  }

  const Tensor& mask_t = batch.mask;
  stats.entropy = -masked_mean_value(cur(entropy_pen).value(), mask_t, n_valid);
  if (expert) stats.divergence = masked_mean_value(cur(divergence).value(), mask_t, n_valid);

  Var total;
  Var feats[2];
  if (uses_critics()) {
    // Targets from the frozen critics; nothing here carries a gradient.
    Var vbar;
    Var tq[2];
    for (int i = 0; i < 2; ++i) {
      Binding tb{g, target_store_[i], false};
      Var f = nxt(critic_[i].features(tb, obs, prev, B));
      tq[i] = discrete ? critic_[i].values(tb, f) : critic_[i].values(tb, f, ad::detach(nxt(action)));
    }
    vbar = ad::minimum(tq[0], tq[1]);
    if (discrete) vbar = ad::row_sum(ad::mul(ad::detach(nxt(probs)), vbar));
    const Tensor& v = vbar.value();
    const Tensor& pen = nxt(penalty).value();
    Tensor y({N, 1});
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = batch.rewards[i] + config_.gamma * (1.0 - batch.dones[i]) * (v[i] - alpha * pen[i]);
    }
    Var target = g.constant(y);

    Tensor actions({N, discrete ? space_.n : space_.dim});
    for (std::size_t r = 0; r < N; ++r) {
      if (batch.mask[r] == 0.0) continue;
      if (discrete) {
        actions.at(r, static_cast<std::size_t>(batch.actions[r])) = 1.0;
      } else {
        for (std::size_t k = 0; k < space_.dim; ++k) actions.at(r, k) = to_unit(batch.actions.at(r, k), k);
      }
    }
    Var stored = g.constant(actions);
    Var critic_loss;
    double q_sum = 0.0;
    for (int i = 0; i < 2; ++i) {
      Binding cb{g, critic_store_[i], true};
      feats[i] = critic_[i].features(cb, cur(obs), cur(prev), B);
      Var q = discrete ? ad::row_sum(ad::mul(critic_[i].values(cb, feats[i]), stored))
                       : critic_[i].values(cb, feats[i], stored);
      q_sum += masked_mean_value(q.value(), mask_t, n_valid);
      Var l = mmean(ad::square(ad::sub(q, target)));
      critic_loss = critic_loss.valid() ? ad::add(critic_loss, l) : l;
    }
    stats.q_mean = q_sum / 2.0;
    stats.critic_loss = critic_loss.value().item();
    stats.targets = std::move(y);
    total = critic_loss;
  }

  // Actor. The critic terms read detached features through frozen copies of
  // the critic heads, so the actor loss never reaches critic parameters.
  Var rl_row, bc_row;
  if (rl_actor) {
    Var qv[2];
    for (int i = 0; i < 2; ++i) {
      Binding snap{g, critic_store_[i], false, true};
      qv[i] = discrete ? critic_[i].values(snap, ad::detach(feats[i]))
                       : critic_[i].values(snap, ad::detach(feats[i]), cur(action));
    }
    Var qpi = ad::minimum(qv[0], qv[1]);
    if (discrete) qpi = ad::row_sum(ad::mul(cur(probs), qpi));
    rl_row = ad::sub(ad::scale(cur(penalty), alpha), qpi);
    stats.rl_loss = mmean(rl_row).value().item();
  }
  if (alg != Algorithm::kSac && alg != Algorithm::kCosil) {
    bc_row = cur(divergence);
    stats.bc_loss = mmean(bc_row).value().item();
  }

  Var actor;
  switch (alg) {
    case Algorithm::kSac:
    case Algorithm::kCosil: actor = mmean(rl_row); break;
    case Algorithm::kDagger: actor = mmean(bc_row); break;
    case Algorithm::kBcSac:
      actor = ad::add(ad::scale(mmean(bc_row), config_.bc_weight), ad::scale(mmean(rl_row), 1.0 - config_.bc_weight));
      break;
    case Algorithm::kBc2Sac: actor = bc_phase ? mmean(bc_row) : mmean(rl_row); break;
    case Algorithm::kAdvOff: {
      Binding snap{g, il_store_, false, true};
      const auto il = il_policy_.forward(snap, cur(obs), cur(prev), B);
      Var e = g.constant(ad::Tensor({N, expert_rows.cols()},
                                    std::vector<double>(expert_rows.data(), expert_rows.data() + N * expert_rows.cols())));
      Var d_il = discrete ? cross_entropy_divergence(e, ad::categorical_head(il.logits).log_probs)
                          : squared_divergence(e, il.mean);
      Tensor w({N, 1}), one_minus({N, 1});
      for (std::size_t i = 0; i < N; ++i) {
        w[i] = advisor_weight(d_il.value()[i], config_.advisor_temperature);
        one_minus[i] = 1.0 - w[i];
      }
      actor = mmean(ad::add(ad::mul(g.constant(w), bc_row), ad::mul(g.constant(one_minus), rl_row)));
      stats.advisor_weights = std::move(w);
      break;
    }
  }
  stats.actor_loss = actor.value().item();
  total = total.valid() ? ad::add(total, actor) : actor;

  require_finite(stats.critic_loss, "critic loss", updates_);
  require_finite(stats.actor_loss, "actor loss", updates_);
  g.backward(total);
  return stats;
}

UpdateStats Agent::compute_gradients(const replay::PaddedBatch& batch, const ExpertFn& expert, Progress progress) {
  return build_and_backward(batch, expert, progress);
}

void Agent::step_optimizers(const UpdateStats&) {
  policy_store_.clip_grad_norm(config_.grad_clip);
  policy_opt_.step(policy_store_);
  if (uses_critics()) {
    for (int i = 0; i < 2; ++i) {
      critic_store_[i].clip_grad_norm(config_.grad_clip);
      critic_opt_[i].step(critic_store_[i]);
    }
  }
}

UpdateStats Agent::update(const replay::PaddedBatch& batch, const ExpertFn& expert, Progress progress) {
  double il_loss = 0.0;
  if (uses_il_policy()) {
    if (!expert) throw UsageError("adv_off needs an expert");
    il_loss = imitation_step(batch, expert_targets(batch, expert, batch.steps * batch.batch), batch.steps * batch.batch);
  }
  UpdateStats stats = build_and_backward(batch, expert, progress);
  stats.il_loss = il_loss;
  step_optimizers(stats);

  const bool rl_actor = config_.algorithm != Algorithm::kDagger && !stats.bc_phase;
  if (alpha_.adaptive() && rl_actor) {
    alpha_.update(alpha_.mode() == AlphaMode::kDivergenceTarget ? stats.divergence : stats.entropy);
  }
  stats.alpha_after = alpha_.value();
  if (uses_critics()) soft_update();
  ++updates_;
  return stats;
}

void Agent::soft_update() {
  // Written as t + take * (o - t) so identical networks stay bit-identical.
  const double take = config_.literal_soft_update ? 1.0 - config_.tau : config_.tau;
  for (int i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < target_store_[i].size(); ++j) {
      Tensor& t = target_store_[i].value(j);
      const Tensor& o = critic_store_[i].value(j);
      for (std::size_t k = 0; k < t.size(); ++k) t[k] += take * (o[k] - t[k]);
    }
  }
}

void Agent::sync_targets() {
  for (int i = 0; i < 2; ++i) target_store_[i].copy_values_from(critic_store_[i]);
}

void Agent::save(std::ostream& os) const {
  os.write(kMagic, sizeof kMagic);
  ad::io::write_u64(os, kVersion);
  ad::io::write_string(os, to_string(config_.algorithm));
  for (std::uint64_t v : {static_cast<std::uint64_t>(obs_dim_), static_cast<std::uint64_t>(space_.n),
                          static_cast<std::uint64_t>(space_.dim), static_cast<std::uint64_t>(config_.net.hidden)}) {
    ad::io::write_u64(os, v);
  }
  policy_store_.save(os);
  for (int i = 0; i < 2; ++i) critic_store_[i].save(os);
  for (int i = 0; i < 2; ++i) target_store_[i].save(os);
  policy_opt_.save(os);
  for (int i = 0; i < 2; ++i) critic_opt_[i].save(os);
  if (uses_il_policy()) {
    il_store_.save(os);
    il_opt_.save(os);
  }
  alpha_.save(os);
  ad::io::write_u64(os, updates_);
  write_rng(os, update_rng_);
  write_rng(os, act_rng_);
  if (!os) throw ValidationError("checkpoint write failed");
}

void Agent::load(std::istream& is) {
  char magic[sizeof kMagic];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw ValidationError("not an agent checkpoint");
  const auto version = ad::io::read_u64(is);
  if (version != kVersion) throw ValidationError("unsupported agent checkpoint version " + std::to_string(version));
  if (ad::io::read_string(is) != to_string(config_.algorithm)) throw ValidationError("checkpoint agent kind differs");
  const std::uint64_t expect[] = {obs_dim_, space_.n, space_.dim, config_.net.hidden};
  for (std::uint64_t e : expect) {
    if (ad::io::read_u64(is) != e) throw ValidationError("checkpoint shapes do not match this agent");
  }
  Agent tmp = *this;
  tmp.policy_store_.load(is);
  for (int i = 0; i < 2; ++i) tmp.critic_store_[i].load(is);
  for (int i = 0; i < 2; ++i) tmp.target_store_[i].load(is);
  tmp.policy_opt_.load(is);
  for (int i = 0; i < 2; ++i) tmp.critic_opt_[i].load(is);
  if (uses_il_policy()) {
    tmp.il_store_.load(is);
    tmp.il_opt_.load(is);
  }
  tmp.alpha_.load(is);
  tmp.updates_ = ad::io::read_u64(is);
  read_rng(is, tmp.update_rng_);
  read_rng(is, tmp.act_rng_);
  *this = std::move(tmp);
}

}  // namespace cosil::agents
