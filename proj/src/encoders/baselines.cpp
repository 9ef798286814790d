#include "graphite/encoders/baselines.hpp"

#include <Eigen/Dense>

#include "graphite/errors.hpp"

namespace graphite::encoders {

MeanBaseline MeanBaseline::fit(std::span<const FactualSample> samples) {
  if (samples.empty()) throw ContractError("mean baseline: empty training set");
  double total = 0.0;
  for (const auto& s : samples) total += s.outcome;
  return MeanBaseline(total / static_cast<double>(samples.size()));
}

num::Tensor MeanBaseline::predict(const num::Tensor& covariates,
                                  std::span<const TreatmentId> treatments) const {
  if (treatments.empty()) throw ContractError("predict on an empty treatment list");
  return num::Tensor({covariates.rows(), treatments.size()}, mean_);
}

OlsBaseline::OlsBaseline(std::vector<double> weights, std::size_t covariate_dim,
                         std::size_t treatment_count, std::set<TreatmentId> observed)
    : weights_(std::move(weights)),
      covariate_dim_(covariate_dim),
      treatment_count_(treatment_count),
      observed_(std::move(observed)) {
  if (weights_.size() != covariate_dim_ + treatment_count_ + 1) {
    throw DimensionError("OLS weight vector has " + std::to_string(weights_.size()) +
                         " entries, expected " +
                         std::to_string(covariate_dim_ + treatment_count_ + 1));
  }
}

OlsBaseline OlsBaseline::fit(std::span<const FactualSample> samples,
                             std::size_t treatment_count,
                             std::span<const TreatmentId> available) {
  if (samples.empty()) throw ContractError("OLS: need at least one observation");
  const std::size_t d = samples.front().covariates.size();
  const std::size_t width = d + treatment_count + 1;
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(samples.size()),
                                                 static_cast<Eigen::Index>(width));
  Eigen::VectorXd target(static_cast<Eigen::Index>(samples.size()));
  std::set<TreatmentId> observed;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.covariates.size() != d) throw DimensionError("OLS: ragged covariate rows");
    if (!s.treatment.valid_for(treatment_count)) {
      throw OutOfRangeError("OLS: treatment id " + to_string(s.treatment) + " out of range");
    }
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t k = 0; k < d; ++k) design(r, static_cast<Eigen::Index>(k)) = s.covariates[k];
    design(r, static_cast<Eigen::Index>(d + s.treatment.index())) = 1.0;
    design(r, static_cast<Eigen::Index>(width - 1)) = 1.0;
    target(r) = s.outcome;
    observed.insert(s.treatment);
  }
  if (available.empty()) {
    for (std::size_t j = 0; j < treatment_count; ++j) observed.insert(TreatmentId::from_index(j));
  } else {
    for (TreatmentId t : available) {
      if (!t.valid_for(treatment_count)) throw OutOfRangeError("available treatment out of range");
      observed.insert(t);
    }
  }
  Eigen::MatrixXd gram = design.transpose() * design;
  gram.diagonal().array() += kRidge;
  const Eigen::VectorXd rhs = design.transpose() * target;
  const Eigen::VectorXd w = gram.ldlt().solve(rhs);
  if (!w.allFinite()) throw NumericError("OLS normal equations produced non-finite weights");
  return OlsBaseline(std::vector<double>(w.data(), w.data() + w.size()), d, treatment_count,
                     std::move(observed));
}

double OlsBaseline::predict_one(std::span<const double> covariates, TreatmentId treatment) const {
  if (covariates.size() != covariate_dim_) {
    throw DimensionError("OLS expects " + std::to_string(covariate_dim_) + " covariates");
  }
  if (!treatment.valid_for(treatment_count_)) {
    throw OutOfRangeError("treatment id " + to_string(treatment) + " out of range");
  }
  if (!observed_.contains(treatment)) {
    throw CapabilityError("treatment " + to_string(treatment) +
                          " is zero-shot; a one-hot linear model cannot predict it");
  }
  double y = weights_.back() + weights_[covariate_dim_ + treatment.index()];
  for (std::size_t k = 0; k < covariate_dim_; ++k) y += weights_[k] * covariates[k];
  return y;
}

num::Tensor OlsBaseline::predict(const num::Tensor& covariates,
                                 std::span<const TreatmentId> treatments) const {
  if (treatments.empty()) throw ContractError("predict on an empty treatment list");
  num::Tensor out({covariates.rows(), treatments.size()});
  for (std::size_t i = 0; i < covariates.rows(); ++i) {
    for (std::size_t j = 0; j < treatments.size(); ++j) {
      out.at(i, j) = predict_one(covariates.row(i), treatments[j]);
    }
  }
  return out;
}

}  // namespace graphite::encoders
