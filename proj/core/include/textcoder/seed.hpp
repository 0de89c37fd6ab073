#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace textcoder {

// Fans one global seed out to independent streams. Each subsystem passes its
// own purpose tag ("validation", "orders", "tiebreak", ...) so that adding a
// draw in one place never shifts another subsystem's sequence.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view purpose);

// 64-bit FNV-1a; stable across platforms and library versions.
std::uint64_t fnv1a64(std::string_view bytes);

std::uint64_t splitmix64(std::uint64_t x);

// std::mt19937_64's output sequence is fixed by the standard, but the
// distributions are not. These helpers stay on the raw engine output so
// results are identical on every toolchain.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace textcoder
