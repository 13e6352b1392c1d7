#include "cosil/autodiff/layers.hpp"

#include "cosil/errors.hpp"

namespace cosil::ad {

Dense::Dense(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
             std::mt19937_64& rng)
    : in_(in), out_(out) {
  weight_ = store.add(prefix + ".weight", uniform_init({in, out}, in, rng));
  bias_ = store.add(prefix + ".bias", uniform_init({1, out}, in, rng));
}

Var Dense::forward(const Binding& bind, Var x) const {
  return affine(x, bind(weight_), bind(bias_));
}

GruCell::GruCell(ParamStore& store, const std::string& prefix, RecurrentCellConfig config,
                 std::mt19937_64& rng)
    : config_(config) {
  if (config.hidden_width == 0) throw ConfigError("recurrent cell hidden width must be > 0");
  const std::size_t h = config.hidden_width;
  w_input_ = store.add(prefix + ".w_input", uniform_init({config.input_width, 3 * h}, h, rng));
  w_hidden_ = store.add(prefix + ".w_hidden", uniform_init({h, 3 * h}, h, rng));
  bias_ = store.add(prefix + ".bias", uniform_init({1, 3 * h}, h, rng));
}

Var GruCell::step(const Binding& bind, Var x, Var h) const {
  if (x.cols() != config_.input_width || h.cols() != config_.hidden_width ||
      x.rows() != h.rows()) {
    throw ConfigError("recurrent cell step: input " + x.graph->describe(x.id) + " / hidden " +
                      h.graph->describe(h.id) + " do not match widths " +
                      std::to_string(config_.input_width) + "/" +
                      std::to_string(config_.hidden_width));
  }
  Var xp = affine(x, bind(w_input_), bind(bias_));
  return gru_update(xp, h, bind(w_hidden_));
}

std::vector<Var> GruCell::unroll(const Binding& bind, Var inputs, std::size_t steps,
                                 Var h0) const {
  const std::size_t batch = h0.rows();
  if (inputs.rows() != steps * batch || inputs.cols() != config_.input_width) {
    throw ConfigError("recurrent unroll: inputs " + inputs.graph->describe(inputs.id) +
                      " do not match " + std::to_string(steps) + " steps of batch " +
                      std::to_string(batch));
  }
  Var xp_all = affine(inputs, bind(w_input_), bind(bias_));
  Var wh = bind(w_hidden_);
  std::vector<Var> out;
  out.reserve(steps);
  Var h = h0;
  for (std::size_t t = 0; t < steps; ++t) {
    Var xp = steps == 1 ? xp_all : slice_rows(xp_all, t * batch, batch);
    h = gru_update(xp, h, wh);
    out.push_back(h);
  }
  return out;
}

}  // namespace cosil::ad
