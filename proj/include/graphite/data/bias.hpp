#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "graphite/data/dataset.hpp"

namespace graphite::data {

struct BiasConfig {
  double eta = 0.0;  // bias magnitude
  std::uint64_t seed = 0;
  std::size_t samples_per_unit = 1;
};

// rho = eta / (100 sigma), sigma the table-wide outcome standard deviation.
double bias_coefficient(const OutcomeTable& table, double eta);

// softmax(rho * y) over the listed treatments of one unit's outcome row.
std::vector<double> selection_probabilities(std::span<const double> outcome_row, double rho,
                                            std::span<const TreatmentId> allowed);

// Draws samples_per_unit factual records per listed unit with
// t ~ Categorical(softmax(rho * y_i)) restricted to `allowed` (all
// treatments when empty). Units default to every unit of the table.
ObservationSet bias_sample(const OutcomeTable& table, const BiasConfig& bias,
                           std::span<const std::size_t> units = {},
                           std::span<const TreatmentId> allowed = {});

}  // namespace graphite::data
