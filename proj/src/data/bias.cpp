#include "graphite/data/bias.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "graphite/errors.hpp"
#include "graphite/numerics/random.hpp"

namespace graphite::data {

double bias_coefficient(const OutcomeTable& table, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ContractError("eta must be finite and >= 0");
  if (eta == 0.0) return 0.0;
  const double sigma = table.outcome_std();
  if (!(sigma > 0.0)) throw ContractError("bias needs outcomes with positive standard deviation");
  return eta / (100.0 * sigma);
}

std::vector<double> selection_probabilities(std::span<const double> outcome_row, double rho,
                                            std::span<const TreatmentId> allowed) {
  if (allowed.empty()) throw ContractError("selection over an empty treatment set");
  std::vector<double> logits(allowed.size());
  for (std::size_t k = 0; k < allowed.size(); ++k) {
    if (!allowed[k].valid_for(outcome_row.size())) {
      throw OutOfRangeError("treatment id " + to_string(allowed[k]) + " outside outcome row");
    }
    logits[k] = rho * outcome_row[allowed[k].index()];
  }
  const double hi = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& l : logits) {
    l = std::exp(l - hi);
    total += l;
  }
  for (double& l : logits) l /= total;
  return logits;
}

ObservationSet bias_sample(const OutcomeTable& table, const BiasConfig& bias,
                           std::span<const std::size_t> units,
                           std::span<const TreatmentId> allowed) {
  if (table.units() == 0 || table.treatments() == 0) throw ContractError("empty outcome table");
  std::vector<std::size_t> all_units;
  if (units.empty()) {
    all_units.resize(table.units());
    std::iota(all_units.begin(), all_units.end(), std::size_t{0});
    units = all_units;
  }
  std::vector<TreatmentId> all_treatments;
  if (allowed.empty()) {
    for (std::size_t j = 0; j < table.treatments(); ++j) {
      all_treatments.push_back(TreatmentId::from_index(j));
    }
    allowed = all_treatments;
  }
  const double rho = bias_coefficient(table, bias.eta);
  num::Rng rng(bias.seed);
  ObservationSet out;
  out.reserve(units.size() * bias.samples_per_unit);
  for (std::size_t unit : units) {
    if (unit >= table.units()) throw OutOfRangeError("unit " + std::to_string(unit) + " not in table");
    const auto probs = selection_probabilities(table.outcomes().row(unit), rho, allowed);
    auto x = table.covariates().row(unit);
    for (std::size_t s = 0; s < bias.samples_per_unit; ++s) {
      const TreatmentId t = allowed[rng.categorical(probs)];
      out.push_back({unit, std::vector<double>(x.begin(), x.end()), t, table.outcome(unit, t)});
    }
  }
  return out;
}

}  // namespace graphite::data
