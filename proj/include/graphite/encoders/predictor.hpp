#pragma once

#include <span>
#include <string>

#include "graphite/numerics/tensor.hpp"
#include "graphite/treatment_id.hpp"

namespace graphite::encoders {

// Anything that maps (covariates, treatment) to an outcome estimate.
class OutcomePredictor {
 public:
  virtual ~OutcomePredictor() = default;

  // covariates: (units x D). Returns (units x treatments.size()) with entry
  // (i, j) the prediction for unit i under treatments[j].
  virtual num::Tensor predict(const num::Tensor& covariates,
                              std::span<const TreatmentId> treatments) const = 0;

  // False when a treatment absent from training cannot be predicted
  // (one-hot and embedding representations). Such predictors raise
  // CapabilityError instead of returning numbers.
  virtual bool supports_zero_shot() const = 0;
};

}  // namespace graphite::encoders
