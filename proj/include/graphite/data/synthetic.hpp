#pragma once

#include <cstddef>
#include <cstdint>

#include "graphite/data/dataset.hpp"
#include "graphite/graphs/gnn.hpp"
#include "graphite/graphs/graph.hpp"
#include "graphite/numerics/random.hpp"

namespace graphite::data {

struct SyntheticConfig {
  std::size_t units = 200;
  std::size_t treatments = 30;
  std::size_t covariate_dim = 8;
  std::size_t min_nodes = 4;
  std::size_t max_nodes = 10;
  std::size_t label_vocab = 6;
  // Extra edges beyond the spanning tree, as a fraction of the node count.
  double extra_edge_rate = 0.2;
  // Width of the fixed graph fingerprint s_j that drives the outcomes.
  std::size_t fingerprint_dim = 8;
  // Standard deviation of the bilinear term x^T A s before tanh.
  double interaction_scale = 2.0;
  std::uint64_t seed = 0;
};

// Fixed random pieces of the outcome function
//   y(i, j) = tanh(x_i^T A s_j) + 0.1 x_i^T b + 0.1 c^T s_j
// where s_j is a random-weight graph encoding of G_j, standardised per
// feature over the catalog.
struct GroundTruth {
  graphs::GraphEncoder fingerprint;
  num::Tensor a;  // (D x fingerprint_dim)
  num::Tensor b;  // (D)
  num::Tensor c;  // (fingerprint_dim)

  num::Tensor fingerprints(const graphs::TreatmentCatalog& catalog) const;
  num::Tensor outcomes(const graphs::TreatmentCatalog& catalog, const num::Tensor& covariates) const;
};

struct SyntheticDataset {
  graphs::TreatmentCatalog catalog;
  OutcomeTable table;
  GroundTruth truth;
};

// Connected graph: uniform random labelled spanning tree (Pruefer code) plus
// round(extra_edge_rate * n) distinct extra edges where room allows.
graphs::LabeledGraph random_connected_graph(std::size_t nodes, std::size_t label_vocab,
                                            double extra_edge_rate, num::Rng& rng);

SyntheticDataset generate_synthetic(const SyntheticConfig& config);

}  // namespace graphite::data
