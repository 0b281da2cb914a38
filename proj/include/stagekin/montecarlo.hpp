#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace stagekin::mc {

/// Execution mode for seeded trial batches. Serial is the reference
/// implementation; Parallel distributes trials over OpenMP threads.
/// Both fill the result vector by trial index, so outputs are identical
/// regardless of mode or thread count.
enum class Execution { Serial, Parallel };

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Decorrelated per-trial seed stream derived from a base seed.
inline std::uint64_t derive_seed(std::uint64_t base_seed,
                                 std::uint64_t index) {
  return splitmix64(base_seed ^ splitmix64(index + 1));
}

/// Runs `trials` independent seeded trials of `fn(index, seed)` and
/// returns the results ordered by trial index. Trials must not throw.
template <typename R, typename Fn>
std::vector<R> run_seeded(std::uint64_t base_seed, int trials, Execution exec,
                          Fn&& fn) {
  std::vector<R> out(static_cast<std::size_t>(trials));
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < trials; ++i) {
      out[static_cast<std::size_t>(i)] = fn(i, derive_seed(base_seed, i));
    }
  } else {
    for (int i = 0; i < trials; ++i) {
      out[static_cast<std::size_t>(i)] = fn(i, derive_seed(base_seed, i));
    }
  }
  return out;
}

}  // namespace stagekin::mc
