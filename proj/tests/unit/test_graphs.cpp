#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "graphite/data/synthetic.hpp"
#include "graphite/errors.hpp"
#include "graphite/graphs/gnn.hpp"
#include "graphite/graphs/graph.hpp"
#include "graphite/numerics/ops.hpp"

namespace graphite {
namespace {

using graphs::LabeledGraph;
using num::Tensor;
using num::Var;

Tensor random_matrix(std::size_t r, std::size_t c, num::Rng& rng) {
  Tensor t(num::Shape{r, c});
  for (auto& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// Straight-line evaluation of one message-passing layer.
Tensor layer_oracle(const Tensor& v, const LabeledGraph& g, const Tensor& w, const Tensor& m) {
  const std::size_t n = v.rows();
  const std::size_t d = v.cols();
  Tensor out(num::Shape{n, d});
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> agg(d, 0.0);
    for (std::size_t j : g.neighbors(i)) {
      for (std::size_t k = 0; k < d; ++k) agg[k] += v.at(j, k);
    }
    for (std::size_t k = 0; k < d; ++k) {
      double s = 0.0;
      for (std::size_t a = 0; a < d; ++a) s += v.at(i, a) * w.at(a, k) + agg[a] * m.at(a, k);
      out.at(i, k) = std::max(0.0, s);
    }
  }
  return out;
}

std::vector<double> readout_oracle(const std::vector<Tensor>& layers) {
  const std::size_t n = layers[0].rows();
  const std::size_t d = layers[0].cols();
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> z(d, 0.0);
    for (const auto& l : layers) {
      for (std::size_t k = 0; k < d; ++k) z[k] += l.at(i, k);
    }
    double denom = 0.0;
    for (double x : z) denom += std::exp(x);
    for (std::size_t k = 0; k < d; ++k) out[k] += std::exp(z[k]) / denom;
  }
  return out;
}

TEST(LabeledGraph, ValidatesEdges) {
  EXPECT_THROW(LabeledGraph({0, 1}, {{0, 2}}), InvalidTreatmentError);
  EXPECT_THROW(LabeledGraph({0, 1}, {{1, 1}}), InvalidTreatmentError);
  EXPECT_THROW(LabeledGraph({0, 1}, {{0, 1}, {1, 0}}), InvalidTreatmentError);
  const LabeledGraph g({0, 1, 2}, {{0, 1}, {1, 2}});
  EXPECT_EQ(g.neighbors(1).size(), 2u);
}

TEST(TreatmentCatalog, RejectsBadLabelsAndEmptyGraphs) {
  EXPECT_THROW(graphs::TreatmentCatalog({LabeledGraph({0, 3}, {})}, 3), InvalidTreatmentError);
  EXPECT_THROW(graphs::TreatmentCatalog({LabeledGraph({}, {})}, 3), InvalidTreatmentError);
}

TEST(TreatmentCatalog, JsonRoundTrip) {
  graphs::TreatmentCatalog catalog({LabeledGraph({0, 1}, {{0, 1}}), LabeledGraph({2}, {})}, 3);
  const auto text = graphs::catalog_to_string(catalog);
  EXPECT_EQ(graphs::catalog_from_string(text), catalog);
  EXPECT_EQ(catalog.at(TreatmentId(2)).node_count(), 1u);
  EXPECT_THROW(catalog.at(TreatmentId(3)), OutOfRangeError);
}

TEST(TreatmentCatalog, JsonErrorsNameTheGraph) {
  const std::string bad =
      R"({"label_vocab": 2, "graphs": [{"id": 1, "node_labels": [0, 5], "edges": []}]})";
  try {
    graphs::catalog_from_string(bad);
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("graph id 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(graphs::catalog_from_string(
                   R"({"label_vocab": 2, "graphs": [{"id": 2, "node_labels": [0], "edges": []}]})"),
               SchemaError);
  EXPECT_THROW(graphs::catalog_from_string("not json"), SchemaError);
}

TEST(GnnLayer, SingleNodeIdentity) {
  const LabeledGraph g({0}, {});
  const Var out = graphs::gnn_layer(num::constant(Tensor::matrix({{1.0, -1.0}})), g,
                                    num::constant(Tensor::identity(2)),
                                    num::constant(Tensor::identity(2)));
  EXPECT_EQ(out.value().values(), (std::vector<double>{1.0, 0.0}));
}

TEST(GnnLayer, PathPassesNeighborState) {
  const LabeledGraph g({0, 0}, {{0, 1}});
  const Tensor v = Tensor::matrix({{0.5, 2.0}, {3.0, -1.0}});
  const Var out = graphs::gnn_layer(num::constant(v), g,
                                    num::constant(Tensor(num::Shape{2, 2}, 0.0)),
                                    num::constant(Tensor::identity(2)));
  EXPECT_EQ(out.value(), Tensor::matrix({{3.0, 0.0}, {0.5, 2.0}}));
}

TEST(GnnLayer, MatchesLoopOracleAndIsEquivariant) {
  num::Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = data::random_connected_graph(6, 3, 0.5, rng);
    const Tensor v = random_matrix(6, 4, rng);
    const Tensor w = random_matrix(4, 4, rng);
    const Tensor m = random_matrix(4, 4, rng);
    const Tensor out = graphs::gnn_layer(num::constant(v), g, num::constant(w),
                                         num::constant(m)).value();
    const Tensor oracle = layer_oracle(v, g, w, m);
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], oracle[i], 1e-12);

    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const auto pg = g.relabeled(perm);
    Tensor pv(num::Shape{6, 4});
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t k = 0; k < 4; ++k) pv.at(perm[i], k) = v.at(i, k);
    }
    const Tensor pout = graphs::gnn_layer(num::constant(pv), pg, num::constant(w),
                                          num::constant(m)).value();
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(pout.at(perm[i], k), out.at(i, k), 1e-12);
    }
  }
}

TEST(GnnLayer, ShapeMismatch) {
  const LabeledGraph g({0, 0}, {{0, 1}});
  EXPECT_THROW(graphs::gnn_layer(num::constant(Tensor(num::Shape{3, 2})), g,
                                 num::constant(Tensor::identity(2)),
                                 num::constant(Tensor::identity(2))),
               DimensionError);
  EXPECT_THROW(graphs::gnn_layer(num::constant(Tensor(num::Shape{2, 2})), g,
                                 num::constant(Tensor::identity(3)),
                                 num::constant(Tensor::identity(2))),
               DimensionError);
}

TEST(GnnReadout, ZeroStatesGiveUniformSoftmax) {
  const Var zeros = num::constant(Tensor(num::Shape{1, 4}, 0.0));
  std::vector<Var> layers{zeros, zeros};
  const Var out = graphs::gnn_readout(layers, {{0}}, graphs::ReadoutActivation::kSoftmax);
  for (double v : out.value().data()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(GnnReadout, IdenticalNodesDouble) {
  num::Rng rng(2);
  const Tensor row = random_matrix(1, 3, rng);
  Tensor two(num::Shape{2, 3});
  for (std::size_t k = 0; k < 3; ++k) two.at(0, k) = two.at(1, k) = row.at(0, k);
  std::vector<Var> single{num::constant(row)};
  std::vector<Var> pair{num::constant(two)};
  const auto a = graphs::gnn_readout(single, {{0}}, graphs::ReadoutActivation::kSoftmax).value();
  const auto b = graphs::gnn_readout(pair, {{0, 1}}, graphs::ReadoutActivation::kSoftmax).value();
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(b[k], 2.0 * a[k], 1e-15);
}

TEST(GnnReadout, MatchesLoopOracle) {
  num::Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Tensor> layers;
    std::vector<Var> vars;
    for (int c = 0; c < 4; ++c) {
      layers.push_back(random_matrix(5, 6, rng));
      vars.push_back(num::constant(layers.back()));
    }
    const auto out =
        graphs::gnn_readout(vars, {{0, 1, 2, 3, 4}}, graphs::ReadoutActivation::kSoftmax).value();
    const auto oracle = readout_oracle(layers);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(out[k], oracle[k], 1e-12);
  }
}

TEST(GraphEncoder, FullEncodingMatchesOracle) {
  num::Rng rng(12);
  graphs::GraphEncoder enc(3, {.layers = 2, .hidden_dim = 5}, rng);
  const auto g = data::random_connected_graph(5, 3, 0.4, rng);
  std::vector<Tensor> layers;
  Tensor v(num::Shape{5, 5});
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t k = 0; k < 5; ++k) v.at(i, k) = enc.embeddings().value().at(g.labels()[i], k);
  }
  layers.push_back(v);
  for (int c = 0; c < 2; ++c) {
    layers.push_back(layer_oracle(layers.back(), g, enc.self_weight(c).value(),
                                  enc.neighbor_weight(c).value()));
  }
  const auto oracle = readout_oracle(layers);
  const auto out = enc.encode(g).value();
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(out[k], oracle[k], 1e-12);
}

TEST(GraphEncoder, DepthZeroReadsEmbeddingsOnly) {
  num::Rng rng(1);
  graphs::GraphEncoder enc(2, {.layers = 0, .hidden_dim = 3}, rng);
  const LabeledGraph g({1}, {});
  const auto out = enc.encode(g).value();
  const auto oracle = readout_oracle({Tensor::matrix(1, 3, {enc.embeddings().value().at(1, 0),
                                                          enc.embeddings().value().at(1, 1),
                                                          enc.embeddings().value().at(1, 2)})});
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(out[k], oracle[k], 1e-15);
}

TEST(GraphEncoder, PermutationInvariant) {
  num::Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    graphs::GraphEncoder enc(4, {.layers = 3, .hidden_dim = 8}, rng);
    const auto g = data::random_connected_graph(7, 4, 0.3, rng);
    std::vector<std::size_t> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const auto a = enc.encode(g).value();
    const auto b = enc.encode(g.relabeled(perm)).value();
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  }
}

TEST(GraphEncoder, DistinguishesLabelMultisets) {
  const LabeledGraph a({0, 0, 1}, {{0, 1}, {1, 2}});
  const LabeledGraph b({0, 1, 1}, {{0, 1}, {1, 2}});
  num::Rng rng(5);
  double largest = 0.0;
  for (int draw = 0; draw < 10; ++draw) {
    graphs::GraphEncoder enc(2, {.layers = 2, .hidden_dim = 6}, rng);
    const auto x = enc.encode(a).value();
    const auto y = enc.encode(b).value();
    double d = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) d += (x[k] - y[k]) * (x[k] - y[k]);
    largest = std::max(largest, std::sqrt(d));
  }
  EXPECT_GT(largest, 1e-6);
}

TEST(GraphEncoder, BatchEqualsSingles) {
  num::Rng rng(6);
  graphs::GraphEncoder enc(3, {.layers = 2, .hidden_dim = 4, .shared_weights = false}, rng);
  std::vector<LabeledGraph> gs;
  for (int i = 0; i < 4; ++i) gs.push_back(data::random_connected_graph(3 + i, 3, 0.3, rng));
  std::vector<const LabeledGraph*> ptrs;
  for (const auto& g : gs) ptrs.push_back(&g);
  const auto batch = enc.encode_batch(ptrs).value();
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const auto one = enc.encode(gs[i]).value();
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(batch.at(i, k), one[k], 1e-12);
  }
}

TEST(GraphEncoder, RejectsUnknownLabel) {
  num::Rng rng(6);
  graphs::GraphEncoder enc(2, {.layers = 1, .hidden_dim = 4}, rng);
  EXPECT_THROW(enc.encode(LabeledGraph({0, 2}, {{0, 1}})), InvalidTreatmentError);
}

}  // namespace
}  // namespace graphite
