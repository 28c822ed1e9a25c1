#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace efold {

/// Deterministic random source used everywhere randomness is needed.
///
/// The core generator is std::mt19937_64, whose output sequence is pinned by
/// the C++ standard, and every derived draw below is implemented here rather
/// than with std::*_distribution (whose algorithms are implementation
/// defined). Identical seeds therefore give identical fold assignments and
/// synthetic datasets on every platform, and the draw recipes are simple
/// enough to replay in another language:
///   - bounded(n): rejection sampling on the top of the 64-bit range,
///     result = draw % n with draws >= 2^64 - (2^64 % n) discarded.
///   - uniform01(): (draw >> 11) * 2^-53, uniform in [0, 1).
///   - normal(): Box-Muller, sqrt(-2 ln u1) * cos(2 pi u2) with
///     u1 = 1 - uniform01() and u2 = uniform01(), two draws per call.
///   - shuffle: Fisher-Yates from the back, swap(v[i], v[bounded(i + 1)]).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  std::uint64_t bounded(std::uint64_t n);

  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(bounded(i))]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

/// SplitMix64 finalizer (Steele, Lea, Flood). Used to derive per-run seeds
/// from (base_seed, combination, run) without correlated streams.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace efold
