#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "graphite/encoders/baselines.hpp"
#include "graphite/errors.hpp"
#include "graphite/evaluation/metrics.hpp"
#include "graphite/numerics/random.hpp"

namespace graphite {
namespace {

using num::Tensor;
namespace ev = evaluation;

// Fixed table of predictions, indexed by (unit, treatment id).
class TablePredictor : public encoders::OutcomePredictor {
 public:
  TablePredictor(Tensor table, bool zero_shot) : table_(std::move(table)), zero_shot_(zero_shot) {}
  Tensor predict(const Tensor& covariates, std::span<const TreatmentId> ts) const override {
    Tensor out(num::Shape{covariates.rows(), ts.size()});
    for (std::size_t i = 0; i < covariates.rows(); ++i) {
      const auto unit = static_cast<std::size_t>(covariates.at(i, 0));
      for (std::size_t j = 0; j < ts.size(); ++j) out.at(i, j) = table_.at(unit, ts[j].index());
    }
    return out;
  }
  bool supports_zero_shot() const override { return zero_shot_; }

 private:
  Tensor table_;
  bool zero_shot_;
};

data::OutcomeTable indexed_table(const Tensor& outcomes) {
  Tensor x(num::Shape{outcomes.rows(), 1});
  for (std::size_t i = 0; i < outcomes.rows(); ++i) x.at(i, 0) = static_cast<double>(i);
  return data::OutcomeTable(x, outcomes);
}

TEST(Heaviside, Values) {
  EXPECT_EQ(ev::heaviside(0.0), 0.5);
  EXPECT_EQ(ev::heaviside(3.0), 1.0);
  EXPECT_EQ(ev::heaviside(-1e-300), 0.0);
}

TEST(Rmse, Examples) {
  const Tensor y = Tensor::matrix({{1.0, 2.0}, {3.0, 4.0}});
  EXPECT_EQ(ev::rmse(y, y), 0.0);
  const Tensor shifted = Tensor::matrix({{1.5, 2.5}, {3.5, 4.5}});
  EXPECT_DOUBLE_EQ(ev::rmse(shifted, y), 0.5);
  EXPECT_DOUBLE_EQ(ev::rmse(Tensor::matrix({{0.0, 0.0}}), Tensor::matrix({{1.0, -1.0}})), 1.0);
  EXPECT_THROW(ev::rmse(y, Tensor::matrix({{1.0}})), DimensionError);
}

TEST(Rmse, MatchesLoopOracle) {
  num::Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor a(num::Shape{3, 4}), b(num::Shape{3, 4});
    for (auto& v : a.data()) v = rng.normal();
    for (auto& v : b.data()) v = rng.normal();
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 4; ++j) s += std::pow(a.at(i, j) - b.at(i, j), 2);
    }
    EXPECT_NEAR(ev::rmse(a, b), std::sqrt(s / 12.0), 1e-12);
  }
}

TEST(ConcordanceIndex, HandFixture) {
  const auto ci = ev::concordance_index(Tensor::matrix({{1.0, 2.0, 3.0}}),
                                        Tensor::matrix({{3.0, 1.0, 2.0}}));
  ASSERT_TRUE(ci);
  EXPECT_NEAR(*ci, 1.0 / 3.0, 1e-15);
}

TEST(ConcordanceIndex, PerfectRankingAndTies) {
  const Tensor y = Tensor::matrix({{3.0, 1.0, 2.0}, {0.0, 5.0, 1.0}});
  EXPECT_EQ(*ev::concordance_index(y, y), 1.0);
  EXPECT_EQ(*ev::concordance_index(Tensor(num::Shape{2, 3}, 1.0), y), 0.5);
  // Units without an ordered pair are excluded; none at all is undefined.
  const Tensor flat = Tensor::matrix({{2.0, 2.0}, {1.0, 3.0}});
  EXPECT_EQ(*ev::concordance_index(Tensor::matrix({{9.0, 0.0}, {0.0, 1.0}}), flat), 1.0);
  EXPECT_FALSE(ev::concordance_index(Tensor::matrix({{1.0, 2.0}}), Tensor::matrix({{2.0, 2.0}})));
}

double rank_sum_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  std::vector<double> rank(scores.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  double pos = 0, neg = 0, sum = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      pos += 1;
      sum += rank[i];
    } else {
      neg += 1;
    }
  }
  return (sum - pos * (pos + 1) / 2) / (pos * neg);
}

TEST(ConcordanceIndex, EqualsAucOnBinaryOutcomes) {
  num::Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t t = 4 + rng.below(8);
    std::vector<int> labels(t);
    for (auto& l : labels) l = rng.uniform() < 0.5;
    labels[0] = 1;
    labels[1] = 0;
    std::vector<double> scores(t);
    for (auto& s : scores) s = std::round(rng.uniform(0, 4));  // ties included
    Tensor f(num::Shape{1, t}), y(num::Shape{1, t});
    for (std::size_t j = 0; j < t; ++j) {
      f.at(0, j) = scores[j];
      y.at(0, j) = labels[j];
    }
    EXPECT_NEAR(*ev::concordance_index(f, y), rank_sum_auc(scores, labels), 1e-12);
  }
}

TEST(PopularityBuckets, DesignedCounts) {
  const Tensor x(num::Shape{1, 1});
  auto obs = [&](int id, int count) {
    std::vector<data::Observation> out;
    for (int i = 0; i < count; ++i) out.push_back({0, {0.0}, TreatmentId(id), 0.0});
    return out;
  };
  std::vector<data::Observation> train;
  for (auto [id, count] : std::vector<std::pair<int, int>>{{1, 2}, {2, 9}, {3, 5}, {4, 0}, {5, 5}}) {
    auto o = obs(id, count);
    train.insert(train.end(), o.begin(), o.end());
  }
  std::vector<TreatmentId> ids;
  for (int i = 1; i <= 5; ++i) ids.push_back(TreatmentId(i));
  const auto b = ev::popularity_buckets(train, ids);
  ASSERT_EQ(b.size(), 5u);
  EXPECT_EQ(b[0], (std::vector<TreatmentId>{TreatmentId(2)}));
  EXPECT_EQ(b[1], (std::vector<TreatmentId>{TreatmentId(3)}));
  EXPECT_EQ(b[2], (std::vector<TreatmentId>{TreatmentId(5)}));
  EXPECT_EQ(b[3], (std::vector<TreatmentId>{TreatmentId(1)}));
  EXPECT_EQ(b[4], (std::vector<TreatmentId>{TreatmentId(4)}));
}

TEST(PopularityBuckets, UniformSizesAndUnion) {
  std::vector<data::Observation> train;
  std::vector<TreatmentId> ids;
  for (int i = 1; i <= 23; ++i) {
    ids.push_back(TreatmentId(i));
    train.push_back({0, {0.0}, TreatmentId(i), 0.0});
  }
  const auto b = ev::popularity_buckets(train, ids);
  std::size_t total = 0, lo = 100, hi = 0;
  for (const auto& g : b) {
    total += g.size();
    lo = std::min(lo, g.size());
    hi = std::max(hi, g.size());
  }
  EXPECT_EQ(total, 23u);
  EXPECT_LE(hi - lo, 1u);
}

TEST(Evaluate, RmseAllPairsAndBreakdown) {
  const Tensor y = Tensor::matrix({{1.0, 2.0, 3.0}, {0.0, -1.0, 4.0}, {2.0, 2.0, 2.0}});
  Tensor pred = y;
  for (auto& v : pred.data()) v += 0.25;
  const TablePredictor model(pred, true);
  const auto truth = indexed_table(y);
  const std::vector<std::size_t> units{0, 1, 2};
  const std::vector<TreatmentId> ts{TreatmentId(1), TreatmentId(2), TreatmentId(3)};
  EXPECT_DOUBLE_EQ(ev::rmse_all_pairs(model, truth, units, ts), 0.25);
  const std::vector<data::Observation> train{{0, {0.0}, TreatmentId(2), 2.0}};
  const auto result = ev::evaluate(model, truth, units, ts, train);
  EXPECT_DOUBLE_EQ(result.rmse, 0.25);
  EXPECT_EQ(*result.ci, 1.0);
  EXPECT_EQ(result.groups.size(), 5u);
  const auto rows = ev::to_rows(result, "m", 40.0, 0.1, 3, "test");
  EXPECT_EQ(rows.size(), 12u);
}

TEST(Evaluate, ZeroShotCapability) {
  const Tensor y = Tensor::matrix({{1.0, 2.0}, {0.0, 3.0}});
  const auto truth = indexed_table(y);
  const std::vector<std::size_t> units{0, 1};
  const std::vector<TreatmentId> held{TreatmentId(2)};
  EXPECT_THROW(ev::zero_shot_eval(TablePredictor(y, false), truth, units, held), CapabilityError);
  EXPECT_THROW(ev::zero_shot_eval(TablePredictor(y, true), truth, units, {}), ContractError);
  const auto r = ev::zero_shot_eval(TablePredictor(y, true), truth, units, held);
  EXPECT_EQ(r.rmse, 0.0);
  EXPECT_FALSE(r.ci);
}

TEST(ResultRows, CsvRoundTrip) {
  const ev::ResultRow row{"graphite", 40.0, 0.01, 7, "test", "q2", "ci", 0.71234};
  EXPECT_EQ(ev::row_to_csv(row), "graphite,40,0.01,7,test,q2,ci,0.71234");
  const auto back = ev::row_from_csv(ev::row_to_csv(row));
  EXPECT_EQ(back.method, row.method);
  EXPECT_EQ(back.lambda, row.lambda);
  EXPECT_EQ(back.value, row.value);
  const ev::ResultRow missing{"mean", 0.0, std::nullopt, 1, "test", "all", "ci", std::nullopt};
  EXPECT_EQ(ev::row_to_csv(missing), "mean,0,nan,1,test,all,ci,nan");
  EXPECT_FALSE(ev::row_from_csv("mean,0,nan,1,test,all,ci,nan").value);
  EXPECT_THROW(ev::row_from_csv("a,b"), SchemaError);
}

}  // namespace
}  // namespace graphite
