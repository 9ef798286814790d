#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <vector>

#include "graphite/encoders/predictor.hpp"
#include "graphite/numerics/tensor.hpp"
#include "graphite/treatment_id.hpp"

namespace graphite::encoders {

// Minimal view of a factual record, so baselines do not depend on the data
// module.
struct FactualSample {
  std::span<const double> covariates;
  TreatmentId treatment;
  double outcome;
};

// Predicts the global training-outcome mean everywhere.
class MeanBaseline : public OutcomePredictor {
 public:
  MeanBaseline() = default;
  explicit MeanBaseline(double mean) : mean_(mean) {}
  static MeanBaseline fit(std::span<const FactualSample> samples);

  double value() const noexcept { return mean_; }
  double predict_one() const noexcept { return mean_; }
  num::Tensor predict(const num::Tensor& covariates,
                      std::span<const TreatmentId> treatments) const override;
  bool supports_zero_shot() const override { return true; }

 private:
  double mean_ = 0.0;
};

// Linear regression on [x; one_hot(t); 1], solved through the normal
// equations with a 1e-8 ridge on the diagonal.
class OlsBaseline : public OutcomePredictor {
 public:
  static constexpr double kRidge = 1e-8;

  OlsBaseline() = default;
  OlsBaseline(std::vector<double> weights, std::size_t covariate_dim,
              std::size_t treatment_count, std::set<TreatmentId> observed);
  // `available` lists the treatments eligible in training (all when empty);
  // predicting any other treatment raises CapabilityError.
  static OlsBaseline fit(std::span<const FactualSample> samples, std::size_t treatment_count,
                         std::span<const TreatmentId> available = {});

  double predict_one(std::span<const double> covariates, TreatmentId treatment) const;
  num::Tensor predict(const num::Tensor& covariates,
                      std::span<const TreatmentId> treatments) const override;
  bool supports_zero_shot() const override { return false; }

  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t covariate_dim() const noexcept { return covariate_dim_; }
  std::size_t treatment_count() const noexcept { return treatment_count_; }
  const std::set<TreatmentId>& observed_ids() const noexcept { return observed_; }

 private:
  std::vector<double> weights_;  // covariates, then one-hot, then intercept
  std::size_t covariate_dim_ = 0;
  std::size_t treatment_count_ = 0;
  std::set<TreatmentId> observed_;
};

}  // namespace graphite::encoders
