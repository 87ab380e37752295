#pragma once

#include <cstdint>

namespace dnar {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based stream splitting: stream k of a master seed is
/// splitmix64(master ^ splitmix64(k)). Streams depend only on (master, k), so
/// adding runs never perturbs the seeds of existing ones.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(master ^ splitmix64(stream));
}

/// Two-level split for (run, replicate) grids such as (N, seed) in studies.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t run,
                                    std::uint64_t replicate) noexcept {
  return stream_seed(stream_seed(master, run), replicate);
}

}  // namespace dnar
