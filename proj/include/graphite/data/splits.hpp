#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "graphite/treatment_id.hpp"

namespace graphite::data {

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  bool zero_shot = false;
  double zero_shot_fraction = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct UnitSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Seeded shuffle, then round(train * n) / round(val * n) / rest. Each part is
// returned in ascending order.
UnitSplit split_units(std::size_t unit_count, const SplitSpec& spec);

struct TreatmentSplit {
  std::vector<TreatmentId> observed;
  std::vector<TreatmentId> held_out;
};

// Holds out round(zero_shot_fraction * |T|) treatments. Throws ContractError
// if fewer than one treatment would remain observed.
TreatmentSplit split_treatments_zero_shot(std::size_t treatment_count, const SplitSpec& spec);

}  // namespace graphite::data
