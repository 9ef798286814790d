#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "graphite/graphs/graph.hpp"
#include "graphite/numerics/autodiff.hpp"
#include "graphite/numerics/ops.hpp"
#include "graphite/numerics/random.hpp"

namespace graphite::graphs {

enum class ReadoutActivation { kSoftmax, kSigmoid };

struct GnnConfig {
  std::size_t layers = 3;
  std::size_t hidden_dim = 64;
  ReadoutActivation readout = ReadoutActivation::kSoftmax;
  // One (W, M) pair for all layers, or one pair per layer.
  bool shared_weights = true;
};

// Several graphs laid out as one block-diagonal graph: node rows are
// concatenated in input order and indices are offset per graph.
struct GraphBatch {
  std::vector<std::size_t> labels;
  num::ops::IndexGroups neighbors;  // per node, global indices
  num::ops::IndexGroups members;    // per graph, global node indices

  static GraphBatch build(std::span<const LabeledGraph* const> graphs);
  static GraphBatch build(const LabeledGraph& graph);
};

// One message-passing update over row-vector states:
//   v_k <- relu(v_k W + sum_{m in N(k)} v_m M)
// Nodes without neighbours get relu(v_k W).
num::Var gnn_layer(const num::Var& states, const num::ops::IndexGroups& neighbors,
                   const num::Var& w, const num::Var& m);
num::Var gnn_layer(const num::Var& states, const LabeledGraph& graph, const num::Var& w,
                   const num::Var& m);

// Graph-level representation sum_k sigma_G(sum_c v_k^(c)), one row per
// group in `members`. `per_layer` holds the states of layers 0..C.
num::Var gnn_readout(std::span<const num::Var> per_layer, const num::ops::IndexGroups& members,
                     ReadoutActivation activation);

// The treatment encoder: label embeddings, C message-passing layers, readout.
class GraphEncoder {
 public:
  GraphEncoder() = default;
  GraphEncoder(std::size_t label_vocab, GnnConfig config, num::Rng& rng);

  // 1 x D representation. Throws InvalidTreatmentError for an empty graph.
  num::Var encode(const LabeledGraph& graph) const;
  // k x D, one row per graph, in input order.
  num::Var encode_batch(std::span<const LabeledGraph* const> graphs) const;

  const GnnConfig& config() const noexcept { return config_; }
  std::size_t label_vocab() const noexcept { return label_vocab_; }
  std::size_t output_dim() const noexcept { return config_.hidden_dim; }

  num::Parameter& embeddings() { return embeddings_; }
  const num::Parameter& embeddings() const { return embeddings_; }
  num::Parameter& self_weight(std::size_t layer) { return w_[config_.shared_weights ? 0 : layer]; }
  num::Parameter& neighbor_weight(std::size_t layer) {
    return m_[config_.shared_weights ? 0 : layer];
  }
  std::vector<num::Parameter*> parameters();
  std::vector<const num::Parameter*> parameters() const;

 private:
  std::size_t label_vocab_ = 0;
  GnnConfig config_;
  num::Parameter embeddings_;
  std::vector<num::Parameter> w_;
  std::vector<num::Parameter> m_;
};

}  // namespace graphite::graphs
