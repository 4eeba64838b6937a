#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace diffcone {

// Seeded randomness with a fully specified stream, so results do not depend on
// the standard library's distribution implementations.
//
//   engine:   std::mt19937_64 (sequence fixed by the C++ standard)
//   uniform:  u = ((r >> 11) + 1) * 2^-53, in (0, 1]
//   index:    Lemire's multiply-shift with rejection, in [0, n)
//   gaussian: Box-Muller on two consecutive uniforms u1, u2; yields
//             sqrt(-2 ln u1) cos(2 pi u2) first, then the sin branch.
class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  std::uint64_t index(std::uint64_t n);
  double gaussian();

  // Fisher-Yates from the back: for i = n-1 .. 1 swap(i, index(i + 1)).
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// SplitMix64 finaliser of (seed, stream); gives independent per-item streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace diffcone
