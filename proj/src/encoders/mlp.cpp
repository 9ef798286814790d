#include "graphite/encoders/mlp.hpp"

#include <cmath>

#include "graphite/errors.hpp"
#include "graphite/numerics/ops.hpp"

namespace graphite::encoders {

namespace ops = num::ops;

Mlp::Mlp(const std::string& prefix, MlpConfig config, num::Rng& rng) : config_(std::move(config)) {
  if (config_.input_dim == 0 || config_.widths.empty()) {
    throw ContractError("MLP '" + prefix + "' needs a positive input width and at least one layer");
  }
  std::size_t fan_in = config_.input_dim;
  for (std::size_t layer = 0; layer < config_.widths.size(); ++layer) {
    const std::size_t fan_out = config_.widths[layer];
    if (fan_out == 0) throw ContractError("MLP '" + prefix + "' has a zero-width layer");
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    num::Tensor w({fan_in, fan_out});
    for (double& v : w.data()) v = rng.uniform(-bound, bound);
    num::Tensor b({1, fan_out});
    for (double& v : b.data()) v = rng.uniform(-bound, bound);
    const std::string base = prefix + "." + std::to_string(layer);
    weights_.emplace_back(base + ".weight", std::move(w));
    biases_.emplace_back(base + ".bias", std::move(b));
    fan_in = fan_out;
  }
}

num::Var Mlp::forward(const num::Var& x) const {
  if (x.value().rank() != 2 || x.value().cols() != config_.input_dim) {
    throw DimensionError("MLP expects (batch x " + std::to_string(config_.input_dim) +
                         ") input, got " + num::to_string(x.shape()));
  }
  num::Var h = x;
  for (std::size_t layer = 0; layer < weights_.size(); ++layer) {
    h = ops::add(ops::matmul(h, weights_[layer].var()), biases_[layer].var());
    const bool last = layer + 1 == weights_.size();
    if (!last || config_.output_activation == Activation::kRelu) h = ops::relu(h);
  }
  return h;
}

std::vector<num::Parameter*> Mlp::parameters() {
  std::vector<num::Parameter*> out;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    out.push_back(&weights_[i]);
    out.push_back(&biases_[i]);
  }
  return out;
}

std::vector<const num::Parameter*> Mlp::parameters() const {
  std::vector<const num::Parameter*> out;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    out.push_back(&weights_[i]);
    out.push_back(&biases_[i]);
  }
  return out;
}

}  // namespace graphite::encoders
