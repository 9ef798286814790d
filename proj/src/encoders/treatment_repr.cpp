#include "graphite/encoders/treatment_repr.hpp"

#include <cmath>

#include "graphite/errors.hpp"
#include "graphite/numerics/ops.hpp"

namespace graphite::encoders {

num::Tensor treatment_one_hot(TreatmentId id, std::size_t count) {
  if (!id.valid_for(count)) {
    throw OutOfRangeError("treatment id " + to_string(id) + " outside 1.." +
                          std::to_string(count));
  }
  num::Tensor out({count});
  out[id.index()] = 1.0;
  return out;
}

EmbeddingTable::EmbeddingTable(std::size_t treatment_count, std::size_t dim, num::Rng& rng) {
  if (treatment_count == 0 || dim == 0) throw ContractError("empty embedding table");
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  num::Tensor init({treatment_count, dim});
  for (double& v : init.data()) v = rng.uniform(-bound, bound);
  table_ = num::Parameter("psi.table", std::move(init));
}

void EmbeddingTable::mark_seen(TreatmentId id) {
  if (!id.valid_for(treatment_count())) {
    throw OutOfRangeError("treatment id " + to_string(id) + " outside embedding table");
  }
  seen_.insert(id);
}

num::Var EmbeddingTable::lookup(std::span<const TreatmentId> ids) const {
  num::ops::IndexGroups rows;
  rows.reserve(ids.size());
  for (TreatmentId id : ids) {
    if (!id.valid_for(treatment_count())) {
      throw OutOfRangeError("treatment id " + to_string(id) + " outside 1.." +
                            std::to_string(treatment_count()));
    }
    if (!seen(id)) {
      throw CapabilityError("treatment " + to_string(id) +
                            " was not observed in training; an embedding table cannot "
                            "represent zero-shot treatments");
    }
    rows.push_back({id.index()});
  }
  return num::ops::gather_sum(table_.var(), rows);
}

}  // namespace graphite::encoders
