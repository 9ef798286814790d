#include "graphite/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "graphite/errors.hpp"
#include "graphite/independence/kernels.hpp"
#include "graphite/numerics/ops.hpp"

namespace graphite::training {

namespace ops = num::ops;
using encoders::ModelBundle;
using num::Var;

std::string to_string(Regularizer r) {
  switch (r) {
    case Regularizer::kNone: return "none";
    case Regularizer::kHsic: return "hsic";
    case Regularizer::kNhsic: return "nhsic";
    case Regularizer::kMmdPivot: return "mmd_pivot";
  }
  return "unknown";
}

Regularizer regularizer_from_string(const std::string& name) {
  if (name == "none") return Regularizer::kNone;
  if (name == "hsic") return Regularizer::kHsic;
  if (name == "nhsic") return Regularizer::kNhsic;
  if (name == "mmd_pivot") return Regularizer::kMmdPivot;
  throw UsageError("unknown regularizer '" + name + "'");
}

std::vector<double> default_lambda_grid() { return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}; }

void TrainConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ContractError("lambda must be >= 0");
  for (double l : lambda_grid) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ContractError("lambda grid values must be >= 0");
  }
  if (batch_size == 0) throw ContractError("batch size must be positive");
  if (regularizer != Regularizer::kNone && batch_size < 2) {
    throw ContractError("a kernel regularizer needs batch size >= 2");
  }
  if (!(learning_rate > 0.0)) throw ContractError("learning rate must be positive");
}

Batch Batch::gather(std::span<const data::Observation> observations,
                    std::span<const std::size_t> rows) {
  Batch batch;
  batch.covariates = data::stack_covariates(observations, rows);
  batch.outcomes = num::Tensor({rows.size(), 1});
  batch.treatments.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    batch.treatments.push_back(observations[rows[r]].treatment);
    batch.outcomes[r] = observations[rows[r]].outcome;
  }
  return batch;
}

Var supervised_loss(const Var& predictions, const num::Tensor& targets) {
  if (predictions.value().size() == 0) throw ContractError("supervised loss on an empty batch");
  return ops::mean(ops::squared_difference(predictions, num::constant(targets)));
}

Objective objective(const ModelBundle& model, const Batch& batch,
                    const graphs::TreatmentCatalog& catalog, Regularizer regularizer,
                    double lambda, TreatmentId pivot, std::optional<Bandwidths> bandwidths) {
  if (batch.size() == 0) throw ContractError("objective on an empty batch");
  const auto fwd = model.forward(batch.covariates, batch.treatments, catalog);
  Objective out;
  out.supervised = supervised_loss(fwd.prediction, batch.outcomes);
  switch (regularizer) {
    case Regularizer::kNone:
      out.regularizer = num::constant(num::Tensor::scalar(0.0));
      break;
    case Regularizer::kHsic:
    case Regularizer::kNhsic: {
      if (batch.size() < 2) throw ContractError("kernel regularizer needs at least 2 samples");
      Var k_phi = independence::gaussian_kernel(
          fwd.phi, bandwidths ? bandwidths->phi : independence::median_bandwidth(fwd.phi.value()));
      Var k_psi = independence::gaussian_kernel(
          fwd.psi, bandwidths ? bandwidths->psi : independence::median_bandwidth(fwd.psi.value()));
      out.regularizer = regularizer == Regularizer::kHsic ? independence::hsic(k_phi, k_psi)
                                                          : independence::nhsic(k_phi, k_psi);
      break;
    }
    case Regularizer::kMmdPivot:
      if (batch.size() < 2) throw ContractError("kernel regularizer needs at least 2 samples");
      out.regularizer = independence::mmd_pivot(
          fwd.phi, batch.treatments, pivot,
          bandwidths ? bandwidths->phi : independence::median_bandwidth(fwd.phi.value()));
      break;
  }
  out.total = lambda > 0.0 ? ops::add(out.supervised, ops::scale(out.regularizer, lambda))
                           : out.supervised;
  return out;
}

StepResult train_step(ModelBundle& model, const Batch& batch,
                      const graphs::TreatmentCatalog& catalog, const TrainConfig& config,
                      num::Adam& optimizer, TreatmentId pivot) {
  auto params = model.parameters();
  const std::uint64_t step = optimizer.steps() + 1;
  try {
    Objective obj = objective(model, batch, catalog, config.regularizer, config.lambda, pivot);
    StepResult result{obj.total.value().item(), obj.supervised.value().item(),
                      obj.regularizer.value().item()};
    num::backward(obj.total);
    optimizer.step(params);
    num::zero_grad(params);
    return result;
  } catch (const NumericError& e) {
    throw NumericError("training step " + std::to_string(step) + ": " + e.what());
  }
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    num::Rng& rng) {
  if (batch_size == 0) throw ContractError("batch size must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return out;
}

double factual_rmse(const ModelBundle& model, std::span<const data::Observation> obs,
                    const graphs::TreatmentCatalog& catalog) {
  if (obs.empty()) throw ContractError("factual RMSE over no observations");
  constexpr std::size_t kChunk = 512;
  double total = 0.0;
  for (std::size_t start = 0; start < obs.size(); start += kChunk) {
    std::vector<std::size_t> rows(std::min(kChunk, obs.size() - start));
    std::iota(rows.begin(), rows.end(), start);
    const Batch batch = Batch::gather(obs, rows);
    const num::Tensor pred = model.forward(batch.covariates, batch.treatments, catalog)
                                 .prediction.value();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double e = pred[r] - batch.outcomes[r];
      total += e * e;
    }
  }
  return std::sqrt(total / static_cast<double>(obs.size()));
}

namespace {

std::vector<num::Tensor> snapshot(const ModelBundle& model) {
  std::vector<num::Tensor> out;
  for (const auto* p : model.parameters()) out.push_back(p->value());
  return out;
}

void restore(ModelBundle& model, const std::vector<num::Tensor>& values) {
  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->set_value(values[i]);
}

}  // namespace

FitResult fit(std::span<const data::Observation> train, std::span<const data::Observation> val,
              const graphs::TreatmentCatalog& catalog, encoders::ModelConfig model_config,
              const TrainConfig& config, std::span<const TreatmentId> available) {
  config.validate();
  if (train.empty()) throw ContractError("fit: empty training set");
  const auto started = std::chrono::steady_clock::now();

  model_config.seed = config.seed;
  FitResult result{ModelBundle(model_config), TrainReport{}};
  ModelBundle& model = result.model;
  TrainReport& report = result.report;
  report.lambda = config.lambda;

  if (available.empty()) {
    for (TreatmentId t : catalog.ids()) model.mark_observed(t);
  } else {
    for (TreatmentId t : available) model.mark_observed(t);
  }
  std::vector<TreatmentId> train_ids;
  for (const auto& o : train) {
    model.mark_observed(o.treatment);
    train_ids.push_back(o.treatment);
  }
  const TreatmentId pivot = independence::most_frequent_treatment(train_ids);

  // Validation records whose treatment the model cannot represent are
  // skipped; this only happens for non-graph models.
  std::vector<data::Observation> usable_val;
  for (const auto& o : val) {
    if (model.psi_mode() == encoders::PsiMode::kGraphEncoder || model.observed(o.treatment)) {
      usable_val.push_back(o);
    }
  }

  num::Adam optimizer(num::AdamConfig{.learning_rate = config.learning_rate});
  num::Rng rng(num::derive_seed(config.seed, 31));
  std::vector<num::Tensor> best = snapshot(model);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    EpochRecord record;
    std::size_t steps = 0;
    for (const auto& rows : epoch_batches(train.size(), config.batch_size, rng)) {
      if (rows.size() < 2) continue;  // kernel matrices need n >= 2
      const StepResult step =
          train_step(model, Batch::gather(train, rows), catalog, config, optimizer, pivot);
      record.total += step.total;
      record.supervised += step.supervised;
      record.regularizer += step.regularizer;
      ++steps;
    }
    if (steps > 0) {
      const double n = static_cast<double>(steps);
      record.total /= n;
      record.supervised /= n;
      record.regularizer /= n;
    }
    if (!usable_val.empty()) {
      record.val_rmse = factual_rmse(model, usable_val, catalog);
      if (!report.best_val_rmse || *record.val_rmse < *report.best_val_rmse) {
        report.best_val_rmse = record.val_rmse;
        report.best_epoch = epoch;
        best = snapshot(model);
      }
    } else {
      report.best_epoch = epoch;
      best = snapshot(model);
    }
    report.epochs.push_back(record);
    if (report.best_epoch && epoch - *report.best_epoch >= config.patience) break;
  }
  restore(model, best);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

LambdaSelection select_lambda(std::span<const data::Observation> train,
                              std::span<const data::Observation> val,
                              const graphs::TreatmentCatalog& catalog,
                              const encoders::ModelConfig& model_config, const TrainConfig& config,
                              std::span<const TreatmentId> available) {
  if (config.lambda_grid.empty()) throw ContractError("select_lambda: empty lambda grid");
  if (val.empty()) throw ContractError("select_lambda needs validation observations");
  std::vector<double> grid = config.lambda_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  LambdaSelection selection;
  std::optional<double> best_rmse;
  for (double lambda : grid) {
    TrainConfig run = config;
    run.lambda = lambda;
    run.lambda_grid.clear();
    FitResult fitted = fit(train, val, catalog, model_config, run, available);
    const double rmse = fitted.report.best_val_rmse.value_or(
        std::numeric_limits<double>::infinity());
    if (!best_rmse || rmse < *best_rmse) {
      best_rmse = rmse;
      selection.best_lambda = lambda;
      selection.model = std::move(fitted.model);
    }
    selection.reports.push_back(std::move(fitted.report));
  }
  return selection;
}

std::string report_to_json(const TrainReport& report) {
  using nlohmann::json;
  json epochs = json::array();
  for (const auto& e : report.epochs) {
    json row{{"total", e.total}, {"supervised", e.supervised}, {"regularizer", e.regularizer}};
    row["val_rmse"] = e.val_rmse ? json(*e.val_rmse) : json(nullptr);
    epochs.push_back(std::move(row));
  }
  json doc{{"lambda", report.lambda}, {"epochs", std::move(epochs)}};
  doc["best_epoch"] = report.best_epoch ? json(*report.best_epoch) : json(nullptr);
  doc["best_val_rmse"] = report.best_val_rmse ? json(*report.best_val_rmse) : json(nullptr);
  return doc.dump(1) + "\n";
}

}  // namespace graphite::training
