#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace halomnl {

/// Seeded random stream with portable draws.
///
/// The std:: distribution classes are not pinned across standard libraries, so
/// every draw here is derived directly from raw mt19937_64 output. A (seed,
/// stream) pair opens an independent substream; generators that consume
/// several kinds of randomness split one user seed into purpose-tagged
/// streams so that, e.g., growing a sample count never disturbs earlier draws
/// of another kind.
class Rng {
 public:
  explicit Rng(std::int64_t seed) : Rng(seed, 0) {}

  Rng(std::int64_t seed, std::uint32_t stream);

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

  /// Gaussian via Box-Muller (one spare cached).
  double normal(double mean = 0.0, double stddev = 1.0);

  /// Uniform integer on [0, n) by rejection; n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace halomnl
