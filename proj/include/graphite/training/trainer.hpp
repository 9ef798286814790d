#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphite/data/dataset.hpp"
#include "graphite/encoders/model.hpp"
#include "graphite/graphs/graph.hpp"
#include "graphite/numerics/adam.hpp"
#include "graphite/numerics/random.hpp"

namespace graphite::training {

enum class Regularizer { kNone, kHsic, kNhsic, kMmdPivot };

std::string to_string(Regularizer r);
Regularizer regularizer_from_string(const std::string& name);

// Decades 1e-3 .. 1e3.
std::vector<double> default_lambda_grid();

struct TrainConfig {
  double lambda = 0.0;
  std::vector<double> lambda_grid;  // empty: train once at `lambda`
  std::size_t batch_size = 64;
  std::size_t epochs = 100;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  Regularizer regularizer = Regularizer::kNhsic;
  std::size_t patience = 20;  // epochs without validation improvement

  void validate() const;
};

struct EpochRecord {
  double total = 0.0;        // mean over batches of supervised + lambda * reg
  double supervised = 0.0;   // mean over batches
  double regularizer = 0.0;  // mean over batches
  std::optional<double> val_rmse;
};

struct TrainReport {
  double lambda = 0.0;
  std::vector<EpochRecord> epochs;
  std::optional<std::size_t> best_epoch;  // 0-based
  std::optional<double> best_val_rmse;
  double wall_seconds = 0.0;  // not serialised: reports must be reproducible
};

// A mini-batch materialised from observation rows.
struct Batch {
  num::Tensor covariates;  // (B x D)
  std::vector<TreatmentId> treatments;
  num::Tensor outcomes;  // (B x 1)

  static Batch gather(std::span<const data::Observation> observations,
                      std::span<const std::size_t> rows);
  std::size_t size() const noexcept { return treatments.size(); }
};

struct StepResult {
  double total = 0.0;
  double supervised = 0.0;
  double regularizer = 0.0;
};

// Mean squared error between (B x 1) predictions and targets.
num::Var supervised_loss(const num::Var& predictions, const num::Tensor& targets);

// Everything needed to evaluate the regularised objective on one batch.
struct Objective {
  num::Var total;
  num::Var supervised;
  num::Var regularizer;
};

// L_B + lambda * reg_B. Kernel bandwidths are median heuristics on the current
// phi / psi values, recomputed per call and held constant for gradients.
// `pivot` is the control treatment for kMmdPivot.
// Passing `bandwidths` fixes them instead (phi, psi).
struct Bandwidths {
  double phi = 1.0;
  double psi = 1.0;
};
Objective objective(const encoders::ModelBundle& model, const Batch& batch,
                    const graphs::TreatmentCatalog& catalog, Regularizer regularizer,
                    double lambda, TreatmentId pivot = TreatmentId(1),
                    std::optional<Bandwidths> bandwidths = std::nullopt);

// One forward/backward pass and one Adam update; gradients are zeroed
// afterwards. Throws NumericError tagged with the optimizer step index.
StepResult train_step(encoders::ModelBundle& model, const Batch& batch,
                      const graphs::TreatmentCatalog& catalog, const TrainConfig& config,
                      num::Adam& optimizer, TreatmentId pivot = TreatmentId(1));

// Seeded non-overlapping partition of [0, n) into batches of `batch_size`
// (the last may be shorter). Covers every index exactly once.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    num::Rng& rng);

// Factual RMSE of a model over observation records.
double factual_rmse(const encoders::ModelBundle& model, std::span<const data::Observation> obs,
                    const graphs::TreatmentCatalog& catalog);

struct FitResult {
  encoders::ModelBundle model;
  TrainReport report;
};

// Trains a fresh model built from `model_config` (its seed is replaced by
// config.seed) for config.epochs epochs, or until `patience` epochs pass
// without a better validation RMSE. Returns the parameters of the best
// validation epoch (the last epoch when `val` is empty).
//
// `available` lists the treatments that were eligible for logging (all of
// the catalog when empty); anything else counts as zero-shot for the model.
FitResult fit(std::span<const data::Observation> train, std::span<const data::Observation> val,
              const graphs::TreatmentCatalog& catalog, encoders::ModelConfig model_config,
              const TrainConfig& config, std::span<const TreatmentId> available = {});

struct LambdaSelection {
  double best_lambda = 0.0;
  std::vector<TrainReport> reports;  // ascending lambda
  encoders::ModelBundle model;       // trained at best_lambda
};

// One fit per distinct grid value (shared seed); picks the lowest best
// validation RMSE, ties to the smaller lambda.
LambdaSelection select_lambda(std::span<const data::Observation> train,
                              std::span<const data::Observation> val,
                              const graphs::TreatmentCatalog& catalog,
                              const encoders::ModelConfig& model_config, const TrainConfig& config,
                              std::span<const TreatmentId> available = {});

std::string report_to_json(const TrainReport& report);

}  // namespace graphite::training
