#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphite/data/dataset.hpp"
#include "graphite/encoders/predictor.hpp"
#include "graphite/numerics/tensor.hpp"
#include "graphite/treatment_id.hpp"

namespace graphite::evaluation {

// 1 for x > 0, 0.5 for x == 0, 0 for x < 0.
double heaviside(double x);

// Sum with pairwise (cascade) reduction; result independent of platform
// accumulation quirks for a fixed input order.
double pairwise_sum(std::span<const double> values);

// sqrt of the mean squared residual over all entries of two equal-shape
// (units x treatments) matrices.
double rmse(const num::Tensor& predictions, const num::Tensor& truth);

// Per-unit fraction of strictly ordered outcome pairs (t, u), y_t > y_u,
// scored by heaviside(f_t - f_u), averaged over units with at least one
// such pair. nullopt when no unit has one.
std::optional<double> concordance_index(const num::Tensor& predictions, const num::Tensor& truth);

double rmse_all_pairs(const encoders::OutcomePredictor& model, const data::OutcomeTable& truth,
                      std::span<const std::size_t> units, std::span<const TreatmentId> treatments);

// Throws ContractError when no test unit has an ordered outcome pair.
double concordance_index(const encoders::OutcomePredictor& model, const data::OutcomeTable& truth,
                         std::span<const std::size_t> units,
                         std::span<const TreatmentId> treatments);

struct GroupResult {
  std::string name;
  std::vector<TreatmentId> treatments;
  double rmse = 0.0;
  std::optional<double> ci;
};

struct EvalResult {
  double rmse = 0.0;
  std::optional<double> ci;
  std::size_t units = 0;
  std::size_t treatments = 0;
  std::vector<GroupResult> groups;
};

// Treatments ranked by training frequency (descending, ties by id) and cut
// into `buckets` consecutive groups of near-equal size; group b holds ranks
// [floor(b n / buckets), floor((b + 1) n / buckets)).
std::vector<std::vector<TreatmentId>> popularity_buckets(
    std::span<const data::Observation> train, std::span<const TreatmentId> treatments,
    std::size_t buckets = 5);

// RMSE and CI over all (unit, treatment) pairs, plus the popularity
// breakdown when `train` is non-empty.
EvalResult evaluate(const encoders::OutcomePredictor& model, const data::OutcomeTable& truth,
                    std::span<const std::size_t> units, std::span<const TreatmentId> treatments,
                    std::span<const data::Observation> train = {});

// Evaluation restricted to treatments absent from training. CapabilityError
// if the model cannot represent unseen treatments; ContractError if
// `held_out` is empty.
EvalResult zero_shot_eval(const encoders::OutcomePredictor& model, const data::OutcomeTable& truth,
                          std::span<const std::size_t> units,
                          std::span<const TreatmentId> held_out);

std::string eval_to_json(const EvalResult& result);

// Flat rows for external analysis.
struct ResultRow {
  std::string method;
  double eta = 0.0;
  std::optional<double> lambda;
  std::uint64_t seed = 0;
  std::string split;   // "test" or "zero_shot"
  std::string group;   // "all" or "q1".."q5"
  std::string metric;  // "rmse" or "ci"
  std::optional<double> value;
};

std::vector<ResultRow> to_rows(const EvalResult& result, const std::string& method, double eta,
                               std::optional<double> lambda, std::uint64_t seed,
                               const std::string& split);

inline constexpr const char* kResultsHeader = "method,eta,lambda,seed,split,group,metric,value";
std::string row_to_csv(const ResultRow& row);
ResultRow row_from_csv(const std::string& line);

}  // namespace graphite::evaluation
