#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace graphite::num {

// Seeded generator whose derived draws (uniform, normal, integer, shuffle)
// are defined here rather than by the standard library, so streams are
// reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  // Uniform in [0, n).
  std::size_t below(std::size_t n);
  // Index drawn with probability proportional to weights[i].
  std::size_t categorical(std::span<const double> probabilities);
  std::uint64_t next() { return engine_(); }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent stream seed from a base seed and a salt.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace graphite::num
