#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace feel {

using RngStream = std::mt19937_64;

/// Purpose tags mixed into derived stream seeds so that, e.g., the channel
/// draw and the SGD shuffle of the same (worker, round) never share a stream.
enum class StreamTag : std::uint64_t {
  kProfile = 1,
  kChannel = 2,
  kTraining = 3,
  kSelection = 4,
  kPartition = 5,
  kData = 6,
  kModelInit = 7,
  kTrial = 8,
};

/// Deterministic child stream of `seed` identified by `path`. Independent of
/// call order, so per-worker pipelines can run on any thread.
RngStream derive_stream(std::uint64_t seed, StreamTag tag, std::initializer_list<std::uint64_t> path = {});

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

}  // namespace feel
