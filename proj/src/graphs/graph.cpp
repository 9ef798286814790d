#include "graphite/graphs/graph.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "graphite/errors.hpp"
#include "graphite/io.hpp"

namespace graphite::graphs {

LabeledGraph::LabeledGraph(std::vector<std::size_t> node_labels, std::vector<Edge> edges)
    : labels_(std::move(node_labels)), edges_(std::move(edges)), adjacency_(labels_.size()) {
  const std::size_t n = labels_.size();
  std::set<Edge> seen;
  for (const auto& [a, b] : edges_) {
    if (a >= n || b >= n) {
      throw InvalidTreatmentError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                  ") references a node outside [0, " + std::to_string(n) + ")");
    }
    if (a == b) throw InvalidTreatmentError("self-loop on node " + std::to_string(a));
    if (!seen.emplace(std::min(a, b), std::max(a, b)).second) {
      throw InvalidTreatmentError("duplicate edge (" + std::to_string(a) + ", " +
                                  std::to_string(b) + ")");
    }
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
}

LabeledGraph LabeledGraph::relabeled(const std::vector<std::size_t>& permutation) const {
  const std::size_t n = node_count();
  if (permutation.size() != n) throw ContractError("permutation size differs from node count");
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels.at(permutation[i]) = labels_[i];
  std::vector<Edge> edges;
  edges.reserve(edges_.size());
  for (const auto& [a, b] : edges_) edges.emplace_back(permutation[a], permutation[b]);
  return LabeledGraph(std::move(labels), std::move(edges));
}

TreatmentCatalog::TreatmentCatalog(std::vector<LabeledGraph> graphs, std::size_t label_vocab)
    : graphs_(std::move(graphs)), label_vocab_(label_vocab) {
  if (label_vocab_ == 0) throw InvalidTreatmentError("label_vocab must be positive");
  for (std::size_t j = 0; j < graphs_.size(); ++j) {
    const auto id = std::to_string(j + 1);
    if (graphs_[j].node_count() == 0) {
      throw InvalidTreatmentError("treatment " + id + " has no nodes");
    }
    for (std::size_t label : graphs_[j].labels()) {
      if (label >= label_vocab_) {
        throw InvalidTreatmentError("treatment " + id + " uses label " + std::to_string(label) +
                                    " >= label_vocab " + std::to_string(label_vocab_));
      }
    }
  }
}

const LabeledGraph& TreatmentCatalog::at(TreatmentId id) const {
  if (!id.valid_for(graphs_.size())) {
    throw OutOfRangeError("treatment id " + to_string(id) + " not in catalog of " +
                          std::to_string(graphs_.size()));
  }
  return graphs_[id.index()];
}

std::vector<TreatmentId> TreatmentCatalog::ids() const {
  std::vector<TreatmentId> out;
  out.reserve(graphs_.size());
  for (std::size_t j = 0; j < graphs_.size(); ++j) out.push_back(TreatmentId::from_index(j));
  return out;
}

using nlohmann::json;

std::string catalog_to_string(const TreatmentCatalog& catalog) {
  json graphs = json::array();
  for (std::size_t j = 0; j < catalog.size(); ++j) {
    const auto& g = catalog.graphs()[j];
    json edges = json::array();
    for (const auto& [a, b] : g.edges()) edges.push_back({a, b});
    graphs.push_back({{"id", j + 1}, {"node_labels", g.labels()}, {"edges", std::move(edges)}});
  }
  json doc{{"label_vocab", catalog.label_vocab()}, {"graphs", std::move(graphs)}};
  return doc.dump(1) + "\n";
}

TreatmentCatalog catalog_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("catalog is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("label_vocab") || !doc.contains("graphs") ||
      !doc["graphs"].is_array()) {
    throw SchemaError("catalog needs 'label_vocab' and a 'graphs' array");
  }
  std::size_t vocab = 0;
  try {
    vocab = doc["label_vocab"].get<std::size_t>();
  } catch (const json::exception&) {
    throw SchemaError("catalog 'label_vocab' must be a non-negative integer");
  }
  const auto& entries = doc["graphs"];
  std::vector<LabeledGraph> graphs(entries.size());
  std::vector<bool> filled(entries.size(), false);
  for (std::size_t pos = 0; pos < entries.size(); ++pos) {
    const auto& entry = entries[pos];
    std::string where = "catalog graph #" + std::to_string(pos);
    try {
      const auto id = entry.at("id").get<std::size_t>();
      where = "catalog graph id " + std::to_string(id);
      if (id < 1 || id > entries.size()) {
        throw SchemaError(where + ": ids must be dense in 1.." + std::to_string(entries.size()));
      }
      if (filled[id - 1]) throw SchemaError(where + ": duplicate id");
      auto labels = entry.at("node_labels").get<std::vector<std::size_t>>();
      if (labels.empty()) throw SchemaError(where + ": graph has no nodes");
      for (std::size_t label : labels) {
        if (label >= vocab) {
          throw SchemaError(where + ": node label " + std::to_string(label) +
                            " >= label_vocab " + std::to_string(vocab));
        }
      }
      std::vector<Edge> edges;
      for (const auto& e : entry.at("edges")) {
        auto pair = e.get<std::vector<std::size_t>>();
        if (pair.size() != 2) throw SchemaError(where + ": edge must list exactly 2 nodes");
        edges.emplace_back(pair[0], pair[1]);
      }
      graphs[id - 1] = LabeledGraph(std::move(labels), std::move(edges));
      filled[id - 1] = true;
    } catch (const json::exception& e) {
      throw SchemaError(where + ": " + e.what());
    } catch (const InvalidTreatmentError& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  return TreatmentCatalog(std::move(graphs), vocab);
}

void save_catalog(const std::filesystem::path& path, const TreatmentCatalog& catalog) {
  io::write_file_atomic(path, catalog_to_string(catalog));
}

TreatmentCatalog load_catalog(const std::filesystem::path& path) {
  try {
    return catalog_from_string(io::read_file(path));
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace graphite::graphs
