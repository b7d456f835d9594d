#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace premium {

// Purpose tags keep streams for different consumers of one seed disjoint.
enum class StreamTag : std::uint64_t {
  kSplit = 0x51,
  kFolds = 0x52,
  kBootstrap = 0x53,
  kTreeFeatures = 0x54,
  kSubsample = 0x55,
  kBackground = 0x56,
  kFoldModel = 0x57,
};

// SplitMix64 finalizer. This is the one mixing function used to derive every
// per-tree, per-stage and per-fold stream, so parallel and sequential
// training see the same numbers.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(mix64(seed) ^ static_cast<std::uint64_t>(tag)) ^ index);
}

// A seeded random stream. The engine is std::mt19937_64 (fully specified by
// the standard); bounded integers and shuffles are implemented here rather
// than through <random> distributions, whose output is library-specific.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0)
      : engine_(derive_seed(seed, tag, index)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::size_t uniform_index(std::size_t bound) {
    const auto n = static_cast<std::uint64_t>(bound);
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return static_cast<std::size_t>(r % n);
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    shuffle(std::span<std::size_t>(p));
    return p;
  }

  // k distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + uniform_index(n - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace premium
