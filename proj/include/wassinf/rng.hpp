#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace wassinf {

using Rng = std::mt19937_64;

// Stream tags keep substreams of different consumers apart for a shared seed.
enum class StreamTag : std::uint64_t {
  kDirichlet = 1,
  kLimitDraw = 2,
  kSecondLimitDraw = 3,
  kTreeDraw = 4,
  kLineDraw = 5,
  kBootstrap = 6,
  kPermutation = 7,
  kFiniteSample = 8,
  kSimulation = 9,
};

/// Independent generator for draw `index` of stream `tag` under `seed`.
/// The result depends only on its arguments, never on scheduling.
Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index,
                std::uint64_t sub = 0);

/// Derives a child seed; used when one operation delegates to another seeded one.
std::uint64_t derive_seed(std::uint64_t seed, StreamTag tag, std::uint64_t index);

/// Number of workers used when the caller passes 0.
std::size_t default_workers();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
/// visited exactly once; the first exception thrown by any worker is rethrown.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace wassinf
