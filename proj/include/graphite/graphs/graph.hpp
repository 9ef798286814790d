#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "graphite/treatment_id.hpp"

namespace graphite::graphs {

using Edge = std::pair<std::size_t, std::size_t>;

// Undirected graph with a categorical label per node. Immutable once built.
class LabeledGraph {
 public:
  LabeledGraph() = default;
  // Throws InvalidTreatmentError on out-of-range endpoints, self-loops or
  // duplicate edges (in either orientation).
  LabeledGraph(std::vector<std::size_t> node_labels, std::vector<Edge> edges);

  std::size_t node_count() const noexcept { return labels_.size(); }
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t node) const { return adjacency_[node]; }
  const std::vector<std::vector<std::size_t>>& adjacency() const noexcept { return adjacency_; }

  // Same graph with node i renamed to permutation[i].
  LabeledGraph relabeled(const std::vector<std::size_t>& permutation) const;

  friend bool operator==(const LabeledGraph& a, const LabeledGraph& b) {
    return a.labels_ == b.labels_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<std::size_t> labels_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

// Graphs indexed by treatment id 1..|T|.
class TreatmentCatalog {
 public:
  TreatmentCatalog() = default;
  // Throws InvalidTreatmentError when a label is >= label_vocab or a graph is
  // empty.
  TreatmentCatalog(std::vector<LabeledGraph> graphs, std::size_t label_vocab);

  std::size_t size() const noexcept { return graphs_.size(); }
  std::size_t label_vocab() const noexcept { return label_vocab_; }
  const LabeledGraph& at(TreatmentId id) const;
  const std::vector<LabeledGraph>& graphs() const noexcept { return graphs_; }
  std::vector<TreatmentId> ids() const;

  friend bool operator==(const TreatmentCatalog&, const TreatmentCatalog&) = default;

 private:
  std::vector<LabeledGraph> graphs_;
  std::size_t label_vocab_ = 0;
};

// Catalog file (JSON):
//   {"label_vocab": V,
//    "graphs": [{"id": 1, "node_labels": [..], "edges": [[a, b], ..]}, ..]}
std::string catalog_to_string(const TreatmentCatalog& catalog);
TreatmentCatalog catalog_from_string(const std::string& text);
void save_catalog(const std::filesystem::path& path, const TreatmentCatalog& catalog);
TreatmentCatalog load_catalog(const std::filesystem::path& path);

}  // namespace graphite::graphs
