#include "graphite/evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "graphite/errors.hpp"
#include "graphite/io.hpp"

namespace graphite::evaluation {

double heaviside(double x) {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return 0.0;
  return 0.5;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 8;
  if (values.size() <= kLeaf) {
    double total = 0.0;
    for (double v : values) total += v;
    return total;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double rmse(const num::Tensor& predictions, const num::Tensor& truth) {
  if (predictions.shape() != truth.shape()) {
    throw DimensionError("rmse: prediction shape " + num::to_string(predictions.shape()) +
                         " differs from truth " + num::to_string(truth.shape()));
  }
  if (truth.empty()) throw ContractError("rmse over no pairs");
  std::vector<double> sq(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = truth[i] - predictions[i];
    sq[i] = e * e;
  }
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(sq.size()));
}

std::optional<double> concordance_index(const num::Tensor& predictions, const num::Tensor& truth) {
  if (predictions.shape() != truth.shape()) {
    throw DimensionError("concordance_index: prediction shape " +
                         num::to_string(predictions.shape()) + " differs from truth " +
                         num::to_string(truth.shape()));
  }
  std::vector<double> per_unit;
  const std::size_t t = truth.cols();
  for (std::size_t i = 0; i < truth.rows(); ++i) {
    double score = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < t; ++a) {
      for (std::size_t b = 0; b < t; ++b) {
        if (truth.at(i, a) > truth.at(i, b)) {
          score += heaviside(predictions.at(i, a) - predictions.at(i, b));
          ++pairs;
        }
      }
    }
    if (pairs > 0) per_unit.push_back(score / static_cast<double>(pairs));
  }
  if (per_unit.empty()) return std::nullopt;
  return pairwise_sum(per_unit) / static_cast<double>(per_unit.size());
}

namespace {

void require_selection(std::span<const std::size_t> units, std::span<const TreatmentId> treatments) {
  if (units.empty()) throw ContractError("evaluation needs at least one test unit");
  if (treatments.empty()) throw ContractError("evaluation needs at least one treatment");
}

}  // namespace

double rmse_all_pairs(const encoders::OutcomePredictor& model, const data::OutcomeTable& truth,
                      std::span<const std::size_t> units, std::span<const TreatmentId> treatments) {
  require_selection(units, treatments);
  return rmse(model.predict(truth.covariates_of(units), treatments),
              truth.outcomes_of(units, treatments));
}

double concordance_index(const encoders::OutcomePredictor& model, const data::OutcomeTable& truth,
                         std::span<const std::size_t> units,
                         std::span<const TreatmentId> treatments) {
  require_selection(units, treatments);
  auto ci = concordance_index(model.predict(truth.covariates_of(units), treatments),
                              truth.outcomes_of(units, treatments));
  if (!ci) throw ContractError("concordance index undefined: no unit has an ordered outcome pair");
  return *ci;
}

std::vector<std::vector<TreatmentId>> popularity_buckets(
    std::span<const data::Observation> train, std::span<const TreatmentId> treatments,
    std::size_t buckets) {
  if (buckets == 0) throw ContractError("popularity breakdown needs at least one bucket");
  std::map<TreatmentId, std::size_t> counts;
  for (TreatmentId t : treatments) counts[t] = 0;
  for (const auto& o : train) {
    auto it = counts.find(o.treatment);
    if (it != counts.end()) ++it->second;
  }
  std::vector<TreatmentId> ranked;
  for (const auto& [id, _] : counts) ranked.push_back(id);
  std::stable_sort(ranked.begin(), ranked.end(), [&](TreatmentId a, TreatmentId b) {
    return counts[a] > counts[b];
  });
  const std::size_t n = ranked.size();
  std::vector<std::vector<TreatmentId>> out(buckets);
  for (std::size_t b = 0; b < buckets; ++b) {
    const std::size_t lo = b * n / buckets;
    const std::size_t hi = (b + 1) * n / buckets;
    out[b].assign(ranked.begin() + static_cast<std::ptrdiff_t>(lo),
                  ranked.begin() + static_cast<std::ptrdiff_t>(hi));
  }
  return out;
}

namespace {

// Column subset of a (units x treatments) matrix.
num::Tensor columns(const num::Tensor& m, const std::vector<std::size_t>& cols) {
  num::Tensor out({m.rows(), cols.size()});
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c) out.at(i, c) = m.at(i, cols[c]);
  }
  return out;
}

}  // namespace

EvalResult evaluate(const encoders::OutcomePredictor& model, const data::OutcomeTable& truth,
                    std::span<const std::size_t> units, std::span<const TreatmentId> treatments,
                    std::span<const data::Observation> train) {
  require_selection(units, treatments);
  const num::Tensor pred = model.predict(truth.covariates_of(units), treatments);
  const num::Tensor real = truth.outcomes_of(units, treatments);
  EvalResult result;
  result.rmse = rmse(pred, real);
  result.ci = concordance_index(pred, real);
  result.units = units.size();
  result.treatments = treatments.size();
  if (!train.empty()) {
    const auto buckets = popularity_buckets(train, treatments);
    for (std::size_t b = 0; b < buckets.size(); ++b) {
      GroupResult group;
      group.name = "q" + std::to_string(b + 1);
      group.treatments = buckets[b];
      if (!group.treatments.empty()) {
        std::vector<std::size_t> cols;
        for (TreatmentId t : group.treatments) {
          cols.push_back(static_cast<std::size_t>(
              std::find(treatments.begin(), treatments.end(), t) - treatments.begin()));
        }
        const auto p = columns(pred, cols);
        const auto y = columns(real, cols);
        group.rmse = rmse(p, y);
        group.ci = concordance_index(p, y);
      }
      result.groups.push_back(std::move(group));
    }
  }
  return result;
}

EvalResult zero_shot_eval(const encoders::OutcomePredictor& model, const data::OutcomeTable& truth,
                          std::span<const std::size_t> units,
                          std::span<const TreatmentId> held_out) {
  if (held_out.empty()) throw ContractError("zero-shot evaluation needs held-out treatments");
  if (!model.supports_zero_shot()) {
    throw CapabilityError("this model cannot predict treatments absent from training");
  }
  return evaluate(model, truth, units, held_out);
}

std::string eval_to_json(const EvalResult& result) {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json groups = json::array();
  for (const auto& g : result.groups) {
    std::vector<std::size_t> ids;
    for (TreatmentId t : g.treatments) ids.push_back(t.value());
    groups.push_back({{"name", g.name}, {"treatments", ids}, {"rmse", g.rmse}, {"ci", opt(g.ci)}});
  }
  json doc{{"rmse", result.rmse},   {"ci", opt(result.ci)},
           {"units", result.units}, {"treatments", result.treatments},
           {"groups", std::move(groups)}};
  return doc.dump(1) + "\n";
}

std::vector<ResultRow> to_rows(const EvalResult& result, const std::string& method, double eta,
                               std::optional<double> lambda, std::uint64_t seed,
                               const std::string& split) {
  std::vector<ResultRow> rows;
  auto emit = [&](const std::string& group, std::optional<double> rmse_value,
                  std::optional<double> ci_value) {
    rows.push_back({method, eta, lambda, seed, split, group, "rmse", rmse_value});
    rows.push_back({method, eta, lambda, seed, split, group, "ci", ci_value});
  };
  emit("all", result.rmse, result.ci);
  for (const auto& g : result.groups) {
    emit(g.name, g.treatments.empty() ? std::nullopt : std::optional<double>(g.rmse), g.ci);
  }
  return rows;
}

namespace {

std::string optional_number(const std::optional<double>& v) {
  return v ? io::format_double(*v) : "nan";
}

std::optional<double> parse_optional(const std::string& s) {
  if (s == "nan") return std::nullopt;
  return io::parse_double(s);
}

}  // namespace

std::string row_to_csv(const ResultRow& row) {
  return row.method + "," + io::format_double(row.eta) + "," + optional_number(row.lambda) + "," +
         std::to_string(row.seed) + "," + row.split + "," + row.group + "," + row.metric + "," +
         optional_number(row.value);
}

ResultRow row_from_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (fields.size() != 8) throw SchemaError("results row needs 8 fields: '" + line + "'");
  ResultRow row;
  row.method = fields[0];
  row.eta = io::parse_double(fields[1]);
  row.lambda = parse_optional(fields[2]);
  row.seed = std::stoull(fields[3]);
  row.split = fields[4];
  row.group = fields[5];
  row.metric = fields[6];
  row.value = parse_optional(fields[7]);
  return row;
}

}  // namespace graphite::evaluation
