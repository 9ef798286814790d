#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "graphite/encoders/mlp.hpp"
#include "graphite/encoders/predictor.hpp"
#include "graphite/encoders/treatment_repr.hpp"
#include "graphite/graphs/gnn.hpp"
#include "graphite/graphs/graph.hpp"

namespace graphite::encoders {

enum class PsiMode { kGraphEncoder, kOneHot, kEmbeddingTable };

std::string to_string(PsiMode mode);
PsiMode psi_mode_from_string(const std::string& name);

struct ModelConfig {
  std::size_t covariate_dim = 0;
  std::size_t treatment_count = 0;
  std::size_t label_vocab = 0;
  PsiMode psi_mode = PsiMode::kGraphEncoder;
  std::size_t phi_layers = 3;
  std::size_t phi_dim = 64;  // hidden and output width of phi
  std::size_t g_layers = 3;
  std::size_t g_hidden = 64;
  graphs::GnnConfig gnn;         // used by kGraphEncoder
  std::size_t embedding_dim = 64;  // used by kEmbeddingTable
  std::uint64_t seed = 0;
};

// phi (covariates), psi (treatment) and the outcome head g, trained jointly.
class ModelBundle {
 public:
  struct Forward {
    num::Var phi;         // (B x phi_dim)
    num::Var psi;         // (B x psi_dim)
    num::Var prediction;  // (B x 1)
  };

  ModelBundle() = default;
  explicit ModelBundle(ModelConfig config);

  const ModelConfig& config() const noexcept { return config_; }
  PsiMode psi_mode() const noexcept { return config_.psi_mode; }
  std::size_t psi_dim() const;

  // (B x D) -> (B x phi_dim).
  num::Var encode_covariates(const num::Var& covariates) const;
  // One row per id. In one-hot and embedding modes, ids never marked observed
  // raise CapabilityError.
  num::Var encode_treatments(std::span<const TreatmentId> ids,
                             const graphs::TreatmentCatalog& catalog) const;
  // g([phi; psi]) -> (B x 1).
  num::Var predict_outcome(const num::Var& phi, const num::Var& psi) const;
  Forward forward(const num::Tensor& covariates, std::span<const TreatmentId> ids,
                  const graphs::TreatmentCatalog& catalog) const;

  // Records which treatments appeared in training data.
  void mark_observed(TreatmentId id);
  bool observed(TreatmentId id) const { return observed_.contains(id); }
  const std::set<TreatmentId>& observed_ids() const noexcept { return observed_; }

  Mlp& phi() { return phi_; }
  Mlp& g() { return g_; }
  const Mlp& phi() const { return phi_; }
  const Mlp& g() const { return g_; }
  graphs::GraphEncoder& graph_encoder() { return *graph_encoder_; }
  EmbeddingTable& embedding_table() { return *embedding_; }

  std::vector<num::Parameter*> parameters();
  std::vector<const num::Parameter*> parameters() const;

 private:
  void check_capability(std::span<const TreatmentId> ids) const;

  ModelConfig config_;
  Mlp phi_;
  Mlp g_;
  std::optional<graphs::GraphEncoder> graph_encoder_;
  std::optional<EmbeddingTable> embedding_;
  std::set<TreatmentId> observed_;
};

// Adapts a bundle plus its catalog to the evaluation interface.
class BundlePredictor : public OutcomePredictor {
 public:
  BundlePredictor(const ModelBundle& model, const graphs::TreatmentCatalog& catalog)
      : model_(model), catalog_(catalog) {}

  num::Tensor predict(const num::Tensor& covariates,
                      std::span<const TreatmentId> treatments) const override;
  bool supports_zero_shot() const override {
    return model_.psi_mode() == PsiMode::kGraphEncoder;
  }

 private:
  const ModelBundle& model_;
  const graphs::TreatmentCatalog& catalog_;
};

}  // namespace graphite::encoders
