#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "graphite/numerics/autodiff.hpp"

namespace graphite::num {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moments are keyed by parameter identifier, so
// one optimizer can drive any set of uniquely named parameters.
class Adam {
 public:
  explicit Adam(AdamConfig config = {});

  void step(std::span<Parameter* const> params);

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t steps() const noexcept { return step_; }
  const Tensor& first_moment(const std::string& id) const;
  const Tensor& second_moment(const std::string& id) const;

 private:
  struct Moments {
    Tensor first;
    Tensor second;
  };
  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::map<std::string, Moments> moments_;
};

}  // namespace graphite::num
