#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace causalreg {

// Counter-based generator: value at (key, counter) is a pure function of both,
// so rows, replications and bootstrap draws can be produced in any order (or in
// parallel) and still be bit-identical to a sequential run.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t bits(std::uint64_t counter) const {
    return mix(key_ + counter * 0x9e3779b97f4a7c15ULL);
  }

  // in [0, 1)
  double uniform01(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  // uniform integer in [0, bound); bound must be >= 1
  std::uint64_t uniform_below(std::uint64_t counter, std::uint64_t bound) const {
    return static_cast<std::uint64_t>(uniform01(counter) * static_cast<double>(bound));
  }

  // standard normal via Box-Muller; consumes counters 2c and 2c+1
  double gauss(std::uint64_t counter) const {
    const double u1 =
        static_cast<double>((bits(2 * counter) >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

// Independent stream for (seed, stream); streams derived from distinct tags do
// not overlap the base sequence.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return CounterRng::mix(seed ^ CounterRng::mix(stream + 0xd1b54a32d192ed03ULL));
}

// Fisher-Yates with counter-indexed draws; deterministic in the key.
inline std::vector<int> shuffled_indices(int n, const CounterRng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.uniform_below(
        static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(i) + 1));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return idx;
}

}  // namespace causalreg
