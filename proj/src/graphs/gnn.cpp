#include "graphite/graphs/gnn.hpp"

#include <cmath>

#include "graphite/errors.hpp"

namespace graphite::graphs {

namespace ops = num::ops;
using num::Var;

GraphBatch GraphBatch::build(std::span<const LabeledGraph* const> graphs) {
  GraphBatch batch;
  std::size_t offset = 0;
  for (const LabeledGraph* g : graphs) {
    if (g->node_count() == 0) throw InvalidTreatmentError("cannot encode an empty graph");
    std::vector<std::size_t> member;
    member.reserve(g->node_count());
    for (std::size_t k = 0; k < g->node_count(); ++k) {
      batch.labels.push_back(g->labels()[k]);
      std::vector<std::size_t> nbrs;
      nbrs.reserve(g->neighbors(k).size());
      for (std::size_t m : g->neighbors(k)) nbrs.push_back(offset + m);
      batch.neighbors.push_back(std::move(nbrs));
      member.push_back(offset + k);
    }
    batch.members.push_back(std::move(member));
    offset += g->node_count();
  }
  return batch;
}

GraphBatch GraphBatch::build(const LabeledGraph& graph) {
  const LabeledGraph* one[] = {&graph};
  return build(std::span<const LabeledGraph* const>(one));
}

Var gnn_layer(const Var& states, const ops::IndexGroups& neighbors, const Var& w, const Var& m) {
  const auto& s = states.value();
  if (s.rank() != 2 || s.rows() != neighbors.size()) {
    throw DimensionError("gnn_layer: " + std::to_string(neighbors.size()) +
                         " nodes but states have shape " + num::to_string(states.shape()));
  }
  const std::size_t d = s.cols();
  for (const Var* p : {&w, &m}) {
    if (p->value().rank() != 2 || p->value().rows() != d || p->value().cols() != d) {
      throw DimensionError("gnn_layer: weight shape " + num::to_string(p->shape()) +
                           " does not match state width " + std::to_string(d));
    }
  }
  Var self_term = ops::matmul(states, w);
  Var messages = ops::matmul(ops::gather_sum(states, neighbors), m);
  return ops::relu(ops::add(self_term, messages));
}

Var gnn_layer(const Var& states, const LabeledGraph& graph, const Var& w, const Var& m) {
  return gnn_layer(states, graph.adjacency(), w, m);
}

Var gnn_readout(std::span<const Var> per_layer, const ops::IndexGroups& members,
                ReadoutActivation activation) {
  if (per_layer.empty()) throw ContractError("gnn_readout needs at least the layer-0 states");
  const auto& shape = per_layer.front().shape();
  Var total = per_layer.front();
  for (std::size_t c = 1; c < per_layer.size(); ++c) {
    if (per_layer[c].shape() != shape) {
      throw DimensionError("gnn_readout: layer " + std::to_string(c) + " has shape " +
                           num::to_string(per_layer[c].shape()) + ", layer 0 has " +
                           num::to_string(shape));
    }
    total = ops::add(total, per_layer[c]);
  }
  Var activated = activation == ReadoutActivation::kSoftmax ? ops::softmax(total)
                                                            : ops::sigmoid(total);
  return ops::gather_sum(activated, members);
}

GraphEncoder::GraphEncoder(std::size_t label_vocab, GnnConfig config, num::Rng& rng)
    : label_vocab_(label_vocab), config_(config) {
  if (label_vocab_ == 0 || config_.hidden_dim == 0) {
    throw ContractError("GraphEncoder needs positive label_vocab and hidden_dim");
  }
  const std::size_t d = config_.hidden_dim;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  auto uniform = [&](std::size_t rows, std::size_t cols) {
    num::Tensor t({rows, cols});
    for (double& v : t.data()) v = rng.uniform(-bound, bound);
    return t;
  };
  embeddings_ = num::Parameter("psi.embeddings", uniform(label_vocab_, d));
  const std::size_t sets = config_.shared_weights ? std::min<std::size_t>(1, config_.layers)
                                                  : config_.layers;
  for (std::size_t c = 0; c < sets; ++c) {
    const std::string suffix = config_.shared_weights ? "" : "." + std::to_string(c);
    w_.emplace_back("psi.W" + suffix, uniform(d, d));
    m_.emplace_back("psi.M" + suffix, uniform(d, d));
  }
}

Var GraphEncoder::encode(const LabeledGraph& graph) const {
  const LabeledGraph* one[] = {&graph};
  return encode_batch(one);
}

Var GraphEncoder::encode_batch(std::span<const LabeledGraph* const> graphs) const {
  if (graphs.empty()) throw ContractError("encode_batch on zero graphs");
  const GraphBatch batch = GraphBatch::build(graphs);
  ops::IndexGroups lookup;
  lookup.reserve(batch.labels.size());
  for (std::size_t label : batch.labels) {
    if (label >= label_vocab_) {
      throw InvalidTreatmentError("node label " + std::to_string(label) + " >= label_vocab " +
                                  std::to_string(label_vocab_));
    }
    lookup.push_back({label});
  }
  std::vector<Var> states;
  states.reserve(config_.layers + 1);
  states.push_back(ops::gather_sum(embeddings_.var(), lookup));
  for (std::size_t c = 0; c < config_.layers; ++c) {
    const std::size_t set = config_.shared_weights ? 0 : c;
    states.push_back(gnn_layer(states.back(), batch.neighbors, w_[set].var(), m_[set].var()));
  }
  return gnn_readout(states, batch.members, config_.readout);
}

std::vector<num::Parameter*> GraphEncoder::parameters() {
  std::vector<num::Parameter*> out{&embeddings_};
  for (std::size_t i = 0; i < w_.size(); ++i) {
    out.push_back(&w_[i]);
    out.push_back(&m_[i]);
  }
  return out;
}

std::vector<const num::Parameter*> GraphEncoder::parameters() const {
  std::vector<const num::Parameter*> out{&embeddings_};
  for (std::size_t i = 0; i < w_.size(); ++i) {
    out.push_back(&w_[i]);
    out.push_back(&m_[i]);
  }
  return out;
}

}  // namespace graphite::graphs
