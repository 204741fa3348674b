#ifndef BANDSEL_RANDOM_HPP
#define BANDSEL_RANDOM_HPP

#include <cstdint>
#include <vector>

namespace bandsel {

/// SplitMix64 generator. All seeded behaviour in the library (splits,
/// RELIEF draws, subsampling) is defined in terms of this generator so
/// results are reproducible across platforms and implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw in [0, n). Plain modulo; the bias is irrelevant at the
  /// sample counts involved and keeps the sequence easy to replicate.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  double unit() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// In-place Fisher-Yates shuffle driven by a SplitMix64 stream.
template <class T>
void fisher_yates(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace bandsel

#endif
