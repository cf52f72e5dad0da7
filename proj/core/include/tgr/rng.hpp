#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace tgr {

/// FNV-1a over raw bytes. Stable across platforms, unlike std::hash.
uint64_t fnv1a64(std::string_view bytes, uint64_t seed = 0xcbf29ce484222325ull);

/// Mix two 64-bit values into one (splitmix64 finalizer over the xor).
uint64_t hash_mix(uint64_t a, uint64_t b);

/// Small deterministic PRNG (splitmix64 stream). All randomness in the
/// simulator and the fault injectors goes through this so that corpora and
/// results are byte-reproducible across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64();
  /// Uniform integer in [lo, hi] inclusive. Requires lo <= hi.
  int uniform_int(int lo, int hi);
  /// Uniform double in [0, 1).
  double uniform_double();
  bool chance(double p) { return uniform_double() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<size_t>(uniform_int(0, static_cast<int>(items.size()) - 1))];
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(0, static_cast<int>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  uint64_t state_;
};

}  // namespace tgr
