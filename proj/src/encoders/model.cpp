#include "graphite/encoders/model.hpp"

#include <algorithm>
#include <map>

#include "graphite/errors.hpp"
#include "graphite/numerics/ops.hpp"

namespace graphite::encoders {

namespace ops = num::ops;
using num::Var;

std::string to_string(PsiMode mode) {
  switch (mode) {
    case PsiMode::kGraphEncoder: return "graph_encoder";
    case PsiMode::kOneHot: return "one_hot";
    case PsiMode::kEmbeddingTable: return "embedding_table";
  }
  return "unknown";
}

PsiMode psi_mode_from_string(const std::string& name) {
  if (name == "graph_encoder") return PsiMode::kGraphEncoder;
  if (name == "one_hot") return PsiMode::kOneHot;
  if (name == "embedding_table") return PsiMode::kEmbeddingTable;
  throw SchemaError("unknown psi_mode '" + name + "'");
}

ModelBundle::ModelBundle(ModelConfig config) : config_(std::move(config)) {
  if (config_.covariate_dim == 0 || config_.treatment_count == 0) {
    throw ContractError("model needs positive covariate_dim and treatment_count");
  }
  if (config_.phi_layers == 0 || config_.g_layers == 0) {
    throw ContractError("phi and g need at least one layer");
  }
  num::Rng phi_rng(num::derive_seed(config_.seed, 1));
  num::Rng psi_rng(num::derive_seed(config_.seed, 2));
  num::Rng g_rng(num::derive_seed(config_.seed, 3));

  MlpConfig phi_cfg;
  phi_cfg.input_dim = config_.covariate_dim;
  phi_cfg.widths.assign(config_.phi_layers, config_.phi_dim);
  phi_ = Mlp("phi", phi_cfg, phi_rng);

  switch (config_.psi_mode) {
    case PsiMode::kGraphEncoder:
      graph_encoder_.emplace(config_.label_vocab, config_.gnn, psi_rng);
      break;
    case PsiMode::kEmbeddingTable:
      embedding_.emplace(config_.treatment_count, config_.embedding_dim, psi_rng);
      break;
    case PsiMode::kOneHot:
      break;
  }

  MlpConfig g_cfg;
  g_cfg.input_dim = config_.phi_dim + psi_dim();
  g_cfg.widths.assign(config_.g_layers - 1, config_.g_hidden);
  g_cfg.widths.push_back(1);
  g_ = Mlp("g", g_cfg, g_rng);
}

std::size_t ModelBundle::psi_dim() const {
  switch (config_.psi_mode) {
    case PsiMode::kGraphEncoder: return config_.gnn.hidden_dim;
    case PsiMode::kEmbeddingTable: return config_.embedding_dim;
    case PsiMode::kOneHot: return config_.treatment_count;
  }
  return 0;
}

Var ModelBundle::encode_covariates(const Var& covariates) const { return phi_.forward(covariates); }

void ModelBundle::check_capability(std::span<const TreatmentId> ids) const {
  for (TreatmentId id : ids) {
    if (!id.valid_for(config_.treatment_count)) {
      throw OutOfRangeError("treatment id " + to_string(id) + " outside 1.." +
                            std::to_string(config_.treatment_count));
    }
    if (config_.psi_mode != PsiMode::kGraphEncoder && !observed(id)) {
      throw CapabilityError("treatment " + to_string(id) + " is zero-shot; psi_mode " +
                            to_string(config_.psi_mode) + " cannot predict it");
    }
  }
}

Var ModelBundle::encode_treatments(std::span<const TreatmentId> ids,
                                   const graphs::TreatmentCatalog& catalog) const {
  if (ids.empty()) throw ContractError("encode_treatments on an empty id list");
  check_capability(ids);
  switch (config_.psi_mode) {
    case PsiMode::kGraphEncoder: {
      // Encode each distinct graph once, then fan rows out to batch order.
      std::map<TreatmentId, std::size_t> slot;
      std::vector<const graphs::LabeledGraph*> unique;
      ops::IndexGroups rows;
      rows.reserve(ids.size());
      for (TreatmentId id : ids) {
        auto [it, inserted] = slot.try_emplace(id, unique.size());
        if (inserted) unique.push_back(&catalog.at(id));
        rows.push_back({it->second});
      }
      Var encoded = graph_encoder_->encode_batch(unique);
      if (unique.size() == ids.size()) return encoded;  // rows already in order
      return ops::gather_sum(encoded, rows);
    }
    case PsiMode::kEmbeddingTable:
      return embedding_->lookup(ids);
    case PsiMode::kOneHot: {
      num::Tensor out({ids.size(), config_.treatment_count});
      for (std::size_t r = 0; r < ids.size(); ++r) out.at(r, ids[r].index()) = 1.0;
      return num::constant(std::move(out));
    }
  }
  throw ContractError("unknown psi mode");
}

Var ModelBundle::predict_outcome(const Var& phi, const Var& psi) const {
  if (phi.value().cols() + psi.value().cols() != g_.input_dim()) {
    throw DimensionError("g expects " + std::to_string(g_.input_dim()) + " inputs, got " +
                         std::to_string(phi.value().cols()) + " + " +
                         std::to_string(psi.value().cols()));
  }
  return g_.forward(ops::concat(phi, psi));
}

ModelBundle::Forward ModelBundle::forward(const num::Tensor& covariates,
                                          std::span<const TreatmentId> ids,
                                          const graphs::TreatmentCatalog& catalog) const {
  if (covariates.rows() != ids.size()) {
    throw DimensionError("forward: " + std::to_string(covariates.rows()) + " covariate rows, " +
                         std::to_string(ids.size()) + " treatments");
  }
  Forward out;
  out.phi = encode_covariates(num::constant(covariates));
  out.psi = encode_treatments(ids, catalog);
  out.prediction = predict_outcome(out.phi, out.psi);
  return out;
}

void ModelBundle::mark_observed(TreatmentId id) {
  if (!id.valid_for(config_.treatment_count)) {
    throw OutOfRangeError("treatment id " + to_string(id) + " outside 1.." +
                          std::to_string(config_.treatment_count));
  }
  observed_.insert(id);
  if (embedding_) embedding_->mark_seen(id);
}

std::vector<num::Parameter*> ModelBundle::parameters() {
  std::vector<num::Parameter*> out = phi_.parameters();
  if (graph_encoder_) {
    auto p = graph_encoder_->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  if (embedding_) out.push_back(&embedding_->table());
  auto g = g_.parameters();
  out.insert(out.end(), g.begin(), g.end());
  return out;
}

std::vector<const num::Parameter*> ModelBundle::parameters() const {
  std::vector<const num::Parameter*> out = phi_.parameters();
  if (graph_encoder_) {
    auto p = std::as_const(*graph_encoder_).parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  if (embedding_) out.push_back(&embedding_->table());
  auto g = g_.parameters();
  out.insert(out.end(), g.begin(), g.end());
  return out;
}

num::Tensor BundlePredictor::predict(const num::Tensor& covariates,
                                     std::span<const TreatmentId> treatments) const {
  if (treatments.empty()) throw ContractError("predict on an empty treatment list");
  const std::size_t units = covariates.rows();
  const std::size_t t = treatments.size();
  const num::Tensor phi = model_.encode_covariates(num::constant(covariates)).value();
  const num::Tensor psi = model_.encode_treatments(treatments, catalog_).value();
  const std::size_t p = phi.cols();
  const std::size_t q = psi.cols();

  num::Tensor out({units, t});
  // Bound the size of each pair block passed through g.
  const std::size_t units_per_chunk = std::max<std::size_t>(1, 4096 / t);
  for (std::size_t start = 0; start < units; start += units_per_chunk) {
    const std::size_t stop = std::min(units, start + units_per_chunk);
    num::Tensor pairs({(stop - start) * t, p + q});
    for (std::size_t i = start; i < stop; ++i) {
      for (std::size_t j = 0; j < t; ++j) {
        auto row = pairs.row((i - start) * t + j);
        std::copy(phi.row(i).begin(), phi.row(i).end(), row.begin());
        std::copy(psi.row(j).begin(), psi.row(j).end(), row.begin() + p);
      }
    }
    const num::Tensor y = model_.g().forward(num::constant(std::move(pairs))).value();
    for (std::size_t i = start; i < stop; ++i) {
      for (std::size_t j = 0; j < t; ++j) out.at(i, j) = y[(i - start) * t + j];
    }
  }
  return out;
}

}  // namespace graphite::encoders
