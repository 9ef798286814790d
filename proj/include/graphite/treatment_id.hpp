#pragma once

#include <compare>
#include <cstddef>
#include <string>

namespace graphite {

// Treatment identifier. Ids are dense and 1-based (1..|T|) everywhere they
// are visible: files, CLI output, public API.
class TreatmentId {
 public:
  constexpr TreatmentId() = default;
  constexpr explicit TreatmentId(std::size_t one_based) : value_(one_based) {}
  static constexpr TreatmentId from_index(std::size_t zero_based) {
    return TreatmentId(zero_based + 1);
  }

  constexpr std::size_t value() const noexcept { return value_; }
  // Zero-based column / row position.
  constexpr std::size_t index() const noexcept { return value_ - 1; }
  constexpr bool valid_for(std::size_t count) const noexcept {
    return value_ >= 1 && value_ <= count;
  }

  friend constexpr auto operator<=>(TreatmentId, TreatmentId) = default;

 private:
  std::size_t value_ = 0;
};

inline std::string to_string(TreatmentId id) { return std::to_string(id.value()); }

}  // namespace graphite
