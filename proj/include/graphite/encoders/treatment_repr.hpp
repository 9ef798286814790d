#pragma once

#include <cstddef>
#include <set>
#include <span>

#include "graphite/numerics/autodiff.hpp"
#include "graphite/numerics/random.hpp"
#include "graphite/numerics/tensor.hpp"
#include "graphite/treatment_id.hpp"

namespace graphite::encoders {

// Standard basis vector e_t of length `count`; OutOfRangeError otherwise.
num::Tensor treatment_one_hot(TreatmentId id, std::size_t count);

// Learned per-treatment vectors. Rows of treatments never marked as seen are
// untrained, so looking them up is a CapabilityError.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t treatment_count, std::size_t dim, num::Rng& rng);

  void mark_seen(TreatmentId id);
  bool seen(TreatmentId id) const { return seen_.contains(id); }

  // (ids.size() x dim); gradient flows only into the looked-up rows.
  num::Var lookup(std::span<const TreatmentId> ids) const;

  std::size_t treatment_count() const noexcept { return table_.value().rows(); }
  std::size_t dim() const noexcept { return table_.value().cols(); }
  num::Parameter& table() { return table_; }
  const num::Parameter& table() const { return table_; }
  const std::set<TreatmentId>& seen_ids() const noexcept { return seen_; }

 private:
  num::Parameter table_;
  std::set<TreatmentId> seen_;
};

}  // namespace graphite::encoders
