#include "graphite/data/synthetic.hpp"

#include <cmath>
#include <set>

#include "graphite/errors.hpp"

namespace graphite::data {

graphs::LabeledGraph random_connected_graph(std::size_t nodes, std::size_t label_vocab,
                                            double extra_edge_rate, num::Rng& rng) {
  if (nodes == 0) throw ContractError("random graph needs at least one node");
  std::vector<std::size_t> labels(nodes);
  for (auto& l : labels) l = rng.below(label_vocab);

  std::vector<graphs::Edge> edges;
  std::set<graphs::Edge> present;
  auto add = [&](std::size_t a, std::size_t b) {
    if (present.emplace(std::min(a, b), std::max(a, b)).second) edges.emplace_back(a, b);
  };
  if (nodes == 2) {
    add(0, 1);
  } else if (nodes > 2) {
    // Decode a uniform Pruefer sequence into a labelled tree.
    std::vector<std::size_t> code(nodes - 2);
    for (auto& c : code) c = rng.below(nodes);
    std::vector<std::size_t> degree(nodes, 1);
    for (std::size_t c : code) ++degree[c];
    for (std::size_t c : code) {
      std::size_t leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      add(leaf, c);
      --degree[leaf];
      --degree[c];
    }
    std::size_t u = nodes, v = nodes;
    for (std::size_t k = 0; k < nodes; ++k) {
      if (degree[k] == 1) (u == nodes ? u : v) = k;
    }
    add(u, v);
  }

  const std::size_t max_edges = nodes * (nodes - 1) / 2;
  const auto extra = static_cast<std::size_t>(std::llround(extra_edge_rate * static_cast<double>(nodes)));
  const std::size_t target = std::min(max_edges, edges.size() + extra);
  while (edges.size() < target) {
    const std::size_t a = rng.below(nodes);
    const std::size_t b = rng.below(nodes);
    if (a != b) add(a, b);
  }
  return graphs::LabeledGraph(std::move(labels), std::move(edges));
}

num::Tensor GroundTruth::fingerprints(const graphs::TreatmentCatalog& catalog) const {
  std::vector<const graphs::LabeledGraph*> all;
  for (const auto& g : catalog.graphs()) all.push_back(&g);
  num::Tensor s = fingerprint.encode_batch(all).value();
  const std::size_t t = s.rows();
  for (std::size_t k = 0; k < s.cols(); ++k) {
    double mean = 0.0;
    for (std::size_t j = 0; j < t; ++j) mean += s.at(j, k);
    mean /= static_cast<double>(t);
    double var = 0.0;
    for (std::size_t j = 0; j < t; ++j) var += (s.at(j, k) - mean) * (s.at(j, k) - mean);
    const double sd = std::sqrt(var / static_cast<double>(t));
    for (std::size_t j = 0; j < t; ++j) {
      s.at(j, k) = sd > 1e-12 ? (s.at(j, k) - mean) / sd : 0.0;
    }
  }
  return s;
}

num::Tensor GroundTruth::outcomes(const graphs::TreatmentCatalog& catalog,
                                  const num::Tensor& covariates) const {
  const num::Tensor s = fingerprints(catalog);
  const std::size_t units = covariates.rows();
  const std::size_t d = covariates.cols();
  const std::size_t f = s.cols();
  if (a.rows() != d || a.cols() != f) throw DimensionError("ground truth A has the wrong shape");
  num::Tensor y({units, catalog.size()});
  for (std::size_t i = 0; i < units; ++i) {
    const auto x = covariates.row(i);
    std::vector<double> xa(f, 0.0);
    double xb = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t m = 0; m < f; ++m) xa[m] += x[k] * a.at(k, m);
      xb += x[k] * b[k];
    }
    for (std::size_t j = 0; j < catalog.size(); ++j) {
      double bilinear = 0.0;
      double cs = 0.0;
      for (std::size_t m = 0; m < f; ++m) {
        bilinear += xa[m] * s.at(j, m);
        cs += c[m] * s.at(j, m);
      }
      y.at(i, j) = std::tanh(bilinear) + 0.1 * xb + 0.1 * cs;
    }
  }
  return y;
}

SyntheticDataset generate_synthetic(const SyntheticConfig& config) {
  if (config.units == 0 || config.treatments == 0 || config.covariate_dim == 0 ||
      config.label_vocab == 0 || config.fingerprint_dim == 0 || config.min_nodes == 0) {
    throw ContractError("synthetic sizes must be positive");
  }
  if (config.min_nodes > config.max_nodes) {
    throw ContractError("graph size range is empty: min " + std::to_string(config.min_nodes) +
                        " > max " + std::to_string(config.max_nodes));
  }
  num::Rng graph_rng(num::derive_seed(config.seed, 11));
  std::vector<graphs::LabeledGraph> graphs;
  graphs.reserve(config.treatments);
  for (std::size_t j = 0; j < config.treatments; ++j) {
    const std::size_t n =
        config.min_nodes + graph_rng.below(config.max_nodes - config.min_nodes + 1);
    graphs.push_back(random_connected_graph(n, config.label_vocab, config.extra_edge_rate,
                                            graph_rng));
  }
  graphs::TreatmentCatalog catalog(std::move(graphs), config.label_vocab);

  num::Rng truth_rng(num::derive_seed(config.seed, 12));
  graphs::GnnConfig fp_config;
  fp_config.layers = 2;
  fp_config.hidden_dim = config.fingerprint_dim;
  fp_config.readout = graphs::ReadoutActivation::kSigmoid;
  const std::size_t d = config.covariate_dim;
  const std::size_t f = config.fingerprint_dim;
  GroundTruth truth{graphs::GraphEncoder(config.label_vocab, fp_config, truth_rng),
                    num::Tensor({d, f}), num::Tensor({d}), num::Tensor({f})};
  const double a_sd = config.interaction_scale / std::sqrt(static_cast<double>(d * f));
  for (double& v : truth.a.data()) v = a_sd * truth_rng.normal();
  for (double& v : truth.b.data()) v = truth_rng.normal() / std::sqrt(static_cast<double>(d));
  for (double& v : truth.c.data()) v = truth_rng.normal() / std::sqrt(static_cast<double>(f));

  num::Rng unit_rng(num::derive_seed(config.seed, 13));
  num::Tensor covariates({config.units, d});
  for (double& v : covariates.data()) v = unit_rng.normal();

  num::Tensor outcomes = truth.outcomes(catalog, covariates);
  return {std::move(catalog), OutcomeTable(std::move(covariates), std::move(outcomes)),
          std::move(truth)};
}

}  // namespace graphite::data
