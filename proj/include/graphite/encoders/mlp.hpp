#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "graphite/numerics/autodiff.hpp"
#include "graphite/numerics/random.hpp"

namespace graphite::encoders {

enum class Activation { kIdentity, kRelu };

// Feed-forward stack: ReLU between layers, `output_activation` after the
// last one.
struct MlpConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> widths{64, 64, 64};
  Activation output_activation = Activation::kIdentity;
};

class Mlp {
 public:
  Mlp() = default;
  // Weights and biases drawn uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  // Parameter ids are "<prefix>.<layer>.weight" / ".bias".
  Mlp(const std::string& prefix, MlpConfig config, num::Rng& rng);

  // x: (batch x input_dim) -> (batch x output_dim).
  num::Var forward(const num::Var& x) const;

  std::size_t input_dim() const noexcept { return config_.input_dim; }
  std::size_t output_dim() const noexcept { return config_.widths.back(); }
  std::size_t depth() const noexcept { return weights_.size(); }
  const MlpConfig& config() const noexcept { return config_; }

  num::Parameter& weight(std::size_t layer) { return weights_.at(layer); }
  num::Parameter& bias(std::size_t layer) { return biases_.at(layer); }
  std::vector<num::Parameter*> parameters();
  std::vector<const num::Parameter*> parameters() const;

 private:
  MlpConfig config_;
  std::vector<num::Parameter> weights_;  // (fan_in x fan_out), rows multiply
  std::vector<num::Parameter> biases_;   // (1 x fan_out)
};

}  // namespace graphite::encoders
