#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bcs/types.hpp"

namespace bcs {

/// SplitMix64 finalizer, used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for the stream identified by (master, tags...). Every randomized
/// routine in the library derives its generators this way, so a run is
/// replayable from the master seed alone.
template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t master, Tags... tags)
{
  std::uint64_t h = splitmix64(master);
  ((h = splitmix64(h ^ (static_cast<std::uint64_t>(tags) + 0x9e3779b97f4a7c15ULL))), ...);
  return h;
}

/// Platform-stable generator. std::mt19937_64 is fully specified by the
/// standard; the distribution transforms below are spelled out here instead
/// of using <random> distributions, whose algorithms are implementation
/// defined.
class Rng
{
public:
  explicit Rng(std::uint64_t seed)
    : engine_(seed)
  {
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound).
  Index below(Index bound);

  /// Standard normal via the Marsaglia polar method.
  double normal();

  /// e^{2iπu}, u uniform.
  Complex unit_phase();

  /// Uniformly random subset of {0..n-1} of size k, sorted.
  std::vector<Index> subset(Index n, Index k);

  /// Uniform random direction on the complex unit sphere of C^dim.
  CVector unit_vector(Index dim);

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace bcs
