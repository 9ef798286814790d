#include "graphite/numerics/adam.hpp"

#include <cmath>

#include "graphite/errors.hpp"

namespace graphite::num {

Adam::Adam(AdamConfig config) : config_(config) {
  if (!(config_.learning_rate > 0.0) || !(config_.beta1 > 0.0 && config_.beta1 < 1.0) ||
      !(config_.beta2 > 0.0 && config_.beta2 < 1.0) || !(config_.epsilon > 0.0)) {
    throw ContractError("Adam hyperparameters out of range");
  }
}

void Adam::step(std::span<Parameter* const> params) {
  ++step_;
  const double t = static_cast<double>(step_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (Parameter* p : params) {
    auto [it, inserted] = moments_.try_emplace(p->id());
    Moments& m = it->second;
    if (inserted) {
      m.first = Tensor(p->value().shape());
      m.second = Tensor(p->value().shape());
    } else if (m.first.shape() != p->value().shape()) {
      throw DimensionError("Adam moments for '" + p->id() + "' have shape " +
                           to_string(m.first.shape()));
    }
    auto values = p->mutable_values();
    const auto grad = p->grad().data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      m.first[i] = config_.beta1 * m.first[i] + (1.0 - config_.beta1) * g;
      m.second[i] = config_.beta2 * m.second[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m.first[i] / correction1;
      const double v_hat = m.second[i] / correction2;
      values[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
    if (!p->value().all_finite()) {
      throw NumericError("Adam step " + std::to_string(step_) + " made '" + p->id() +
                         "' non-finite");
    }
  }
}

const Tensor& Adam::first_moment(const std::string& id) const { return moments_.at(id).first; }

const Tensor& Adam::second_moment(const std::string& id) const {
  return moments_.at(id).second;
}

}  // namespace graphite::num
