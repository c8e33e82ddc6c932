#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace readability {

/// Portable seedable generator (SplitMix64, 64-bit state).
///
/// Streams for distinct purposes are obtained with derive(): the child seed
/// depends only on this generator's seed and the label, never on how many
/// numbers were drawn, so adding a consumer does not perturb the others.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller.
  double normal();

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  Rng derive(std::string_view label) const;
  Rng derive(std::uint64_t index) const;

  /// Fisher-Yates; std::shuffle output differs between standard libraries.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace readability
