#pragma once

#include <cstdint>
#include <vector>

namespace sfd {

/// xoshiro256** seeded through SplitMix64.
///
/// All derived draws (uniform doubles, bounded integers, shuffles, normals)
/// are computed here rather than through <random> distributions, whose
/// outputs are implementation-defined. Sequences are identical on every
/// platform for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n); n > 0. Unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller.
  double normal();

  /// Fisher-Yates shuffle driven by below().
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace sfd
