#include "graphite/data/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "graphite/errors.hpp"
#include "graphite/numerics/random.hpp"

namespace graphite::data {

void SplitSpec::validate() const {
  if (train < 0 || val < 0 || test < 0 || std::abs(train + val + test - 1.0) > 1e-9) {
    throw ContractError("split fractions must be non-negative and sum to 1");
  }
  if (!(zero_shot_fraction >= 0.0 && zero_shot_fraction < 1.0)) {
    throw ContractError("zero-shot fraction must lie in [0, 1)");
  }
}

UnitSplit split_units(std::size_t unit_count, const SplitSpec& spec) {
  spec.validate();
  std::vector<std::size_t> order(unit_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  num::Rng rng(num::derive_seed(spec.seed, 21));
  rng.shuffle(order);
  const double n = static_cast<double>(unit_count);
  const auto n_train = std::min<std::size_t>(unit_count, static_cast<std::size_t>(std::llround(spec.train * n)));
  const auto n_val = std::min<std::size_t>(unit_count - n_train, static_cast<std::size_t>(std::llround(spec.val * n)));
  UnitSplit out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                 order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  for (auto* part : {&out.train, &out.val, &out.test}) std::sort(part->begin(), part->end());
  return out;
}

TreatmentSplit split_treatments_zero_shot(std::size_t treatment_count, const SplitSpec& spec) {
  spec.validate();
  const auto held = static_cast<std::size_t>(
      std::llround(spec.zero_shot_fraction * static_cast<double>(treatment_count)));
  if (held >= treatment_count) {
    throw ContractError("holding out " + std::to_string(held) + " of " +
                        std::to_string(treatment_count) + " treatments leaves none observed");
  }
  std::vector<TreatmentId> ids;
  for (std::size_t j = 0; j < treatment_count; ++j) ids.push_back(TreatmentId::from_index(j));
  num::Rng rng(num::derive_seed(spec.seed, 22));
  rng.shuffle(ids);
  TreatmentSplit out;
  out.held_out.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(held));
  out.observed.assign(ids.begin() + static_cast<std::ptrdiff_t>(held), ids.end());
  std::sort(out.held_out.begin(), out.held_out.end());
  std::sort(out.observed.begin(), out.observed.end());
  return out;
}

}  // namespace graphite::data
