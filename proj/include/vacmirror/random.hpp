#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace vacmirror {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2,
// 3", SC'11). A keyed bijection on 128-bit counters, so every draw depends
// only on its (key, counter) and never on the order of generation.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key);
};

// Two independent standard normal deviates keyed by (seed, stream, index).
std::pair<double, double> gaussian_pair(std::uint64_t seed, std::uint64_t stream,
                                        std::uint64_t index);

}  // namespace vacmirror
