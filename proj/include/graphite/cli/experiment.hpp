#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "graphite/data/bias.hpp"
#include "graphite/data/dataset.hpp"
#include "graphite/data/splits.hpp"
#include "graphite/encoders/baselines.hpp"
#include "graphite/encoders/model.hpp"
#include "graphite/evaluation/metrics.hpp"
#include "graphite/training/trainer.hpp"

namespace graphite::cli {

enum class Method { kGraphite, kGnn, kGnnMmd, kEmbedding, kOls, kMean };

std::string to_string(Method method);
Method method_from_string(const std::string& name);
const std::vector<std::string>& method_names();

// Network sizes shared by every neural method.
struct ModelSettings {
  std::size_t phi_layers = 3;
  std::size_t phi_dim = 64;
  std::size_t g_layers = 3;
  std::size_t g_hidden = 64;
  std::size_t gnn_layers = 3;
  std::size_t gnn_dim = 64;
  graphs::ReadoutActivation readout = graphs::ReadoutActivation::kSoftmax;
  bool shared_weights = true;
  std::size_t embedding_dim = 64;
};

// Everything one training/evaluation run needs. Data paths are resolved
// relative to the manifest file.
struct ExperimentManifest {
  std::filesystem::path catalog;
  std::filesystem::path covariates;
  std::filesystem::path outcomes;
  Method method = Method::kGraphite;
  data::BiasConfig bias;
  data::SplitSpec split;
  training::TrainConfig train;
  ModelSettings model;
  std::filesystem::path output = "run";

  ExperimentManifest();
  static ExperimentManifest from_json_text(const std::string& text,
                                           const std::filesystem::path& base_dir);
  static ExperimentManifest load(const std::filesystem::path& path);
  std::string to_json_text() const;
};

// Biased factual data and splits derived from a full outcome table.
struct PreparedData {
  data::UnitSplit units;
  std::vector<TreatmentId> available;  // treatments eligible in training
  std::vector<TreatmentId> held_out;   // zero-shot treatments (may be empty)
  data::ObservationSet train;
  data::ObservationSet val;
};

PreparedData prepare(const data::OutcomeTable& table, const graphs::TreatmentCatalog& catalog,
                     const data::BiasConfig& bias, const data::SplitSpec& split);

encoders::ModelConfig model_config(const ModelSettings& settings, Method method,
                                   const data::OutcomeTable& table,
                                   const graphs::TreatmentCatalog& catalog);

// Regularizer and lambda handling implied by a method.
training::TrainConfig train_config_for(Method method, training::TrainConfig base);

// A fitted method of any kind.
struct TrainedMethod {
  Method method = Method::kMean;
  std::optional<encoders::ModelBundle> network;
  std::optional<encoders::MeanBaseline> mean;
  std::optional<encoders::OlsBaseline> ols;
  std::optional<double> lambda;  // selected or fixed, neural methods only
  std::vector<training::TrainReport> reports;

  // Predictor view; valid while this object and `catalog` live.
  std::unique_ptr<encoders::OutcomePredictor> predictor(
      const graphs::TreatmentCatalog& catalog) const;
};

TrainedMethod train_method(Method method, const ModelSettings& settings,
                           const training::TrainConfig& train, const PreparedData& prepared,
                           const data::OutcomeTable& table,
                           const graphs::TreatmentCatalog& catalog);

// Model directory: model.json (+ checkpoint.json for networks, report.json).
void save_trained(const std::filesystem::path& dir, const TrainedMethod& trained);
TrainedMethod load_trained(const std::filesystem::path& dir);

// Test-set evaluation on `prepared`: all eligible treatments, plus the
// zero-shot evaluation when treatments were held out and the method can
// represent them.
struct CellEvaluation {
  evaluation::EvalResult test;
  std::optional<evaluation::EvalResult> zero_shot;
};
CellEvaluation evaluate_trained(const TrainedMethod& trained, const PreparedData& prepared,
                                const data::OutcomeTable& table,
                                const graphs::TreatmentCatalog& catalog);

std::vector<evaluation::ResultRow> cell_rows(const CellEvaluation& eval, Method method, double eta,
                                             std::optional<double> lambda, std::uint64_t seed);

}  // namespace graphite::cli
