#include "cosil/agents/networks.hpp"

#include "cosil/errors.hpp"

namespace cosil::agents {

using ad::Binding;
using ad::Var;

HistoryEncoder::HistoryEncoder(ad::ParamStore& store, const std::string& prefix, std::size_t obs_dim,
                               std::size_t action_width, const NetConfig& config, std::mt19937_64& rng)
    : config_(config) {
  if (config.obs_embed == 0 || config.action_embed == 0) throw ConfigError("encoder widths must be positive");
  obs_fc_ = ad::Dense(store, prefix + ".obs_fc", obs_dim, config.obs_embed, rng);
  if (recurrent()) {
    action_fc_ = ad::Dense(store, prefix + ".action_fc", action_width, config.action_embed, rng);
    cell_ = ad::GruCell(store, prefix + ".gru", {config.obs_embed + config.action_embed, config.hidden}, rng);
  }
}

Var HistoryEncoder::encode(const Binding& bind, Var obs, Var prev_actions) const {
  Var o = ad::relu(obs_fc_.forward(bind, obs));
  if (!recurrent()) return o;
  Var a = ad::relu(action_fc_.forward(bind, prev_actions));
  return ad::concat({o, a});
}

Var HistoryEncoder::forward(const Binding& bind, Var obs, Var prev_actions, std::size_t batch) const {
  Var x = encode(bind, obs, prev_actions);
  if (!recurrent()) return x;
  if (batch == 0 || obs.rows() % batch != 0) throw ConfigError("encoder rows are not a multiple of the batch");
  const std::size_t steps = obs.rows() / batch;
  Var h0 = bind.graph.constant(ad::Tensor({batch, config_.hidden}));
  const auto hs = cell_.unroll(bind, x, steps, h0);
  return hs.size() == 1 ? hs.front() : ad::stack_rows(hs);
}

Var HistoryEncoder::step(const Binding& bind, Var obs, Var prev_actions, Var hidden) const {
  Var x = encode(bind, obs, prev_actions);
  if (!recurrent()) return x;
  return cell_.step(bind, x, hidden);
}

Head::Head(ad::ParamStore& store, const std::string& prefix, std::size_t in, std::size_t width, std::size_t out,
           std::mt19937_64& rng)
    : hidden_(store, prefix + ".fc", in, width, rng), out_(store, prefix + ".out", width, out, rng) {}

Var Head::forward(const Binding& bind, Var x) const { return out_.forward(bind, ad::relu(hidden_.forward(bind, x))); }

PolicyNet::PolicyNet(ad::ParamStore& store, const std::string& prefix, std::size_t obs_dim,
                     const env::ActionSpace& space, const NetConfig& config, std::mt19937_64& rng)
    : space_(space), encoder_(store, prefix + ".encoder", obs_dim, space.encoding_width(), config, rng) {
  const std::size_t out = space.is_discrete() ? space.n : 2 * space.dim;
  head_ = Head(store, prefix + ".head", encoder_.feature_width(), config.head_width, out, rng);
}

PolicyNet::Output PolicyNet::heads(const Binding& bind, Var features) const {
  Output out;
  out.features = features;
  Var raw = head_.forward(bind, features);
  if (space_.is_discrete()) {
    out.logits = raw;
  } else {
    out.mean = ad::slice_cols(raw, 0, space_.dim);
    out.log_std = ad::slice_cols(raw, space_.dim, space_.dim);
  }
  return out;
}

PolicyNet::Output PolicyNet::forward(const Binding& bind, Var obs, Var prev_actions, std::size_t batch) const {
  return heads(bind, encoder_.forward(bind, obs, prev_actions, batch));
}

PolicyNet::Output PolicyNet::step(const Binding& bind, Var obs, Var prev_actions, Var hidden) const {
  return heads(bind, encoder_.step(bind, obs, prev_actions, hidden));
}

CriticNet::CriticNet(ad::ParamStore& store, const std::string& prefix, std::size_t obs_dim,
                     const env::ActionSpace& space, const NetConfig& config, std::mt19937_64& rng)
    : space_(space), encoder_(store, prefix + ".encoder", obs_dim, space.encoding_width(), config, rng) {
  const std::size_t in = encoder_.feature_width() + (space.is_discrete() ? 0 : space.dim);
  head_ = Head(store, prefix + ".head", in, config.head_width, space.is_discrete() ? space.n : 1, rng);
}

Var CriticNet::features(const Binding& bind, Var obs, Var prev_actions, std::size_t batch) const {
  return encoder_.forward(bind, obs, prev_actions, batch);
}

Var CriticNet::values(const Binding& bind, Var features, Var action) const {
  if (space_.is_discrete()) return head_.forward(bind, features);
  if (!action.valid()) throw UsageError("continuous critic needs an action");
  return head_.forward(bind, ad::concat({features, action}));
}

}  // namespace cosil::agents
