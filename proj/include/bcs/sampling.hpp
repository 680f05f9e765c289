#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcs/blocks.hpp"

namespace bcs {

/// A = (1/√m) stack of B_{k_j}/√π_{k_j}, j = 1..draws.
///
/// `m` is the normalization count. It equals the number of draws for an
/// operator returned by draw_blocks; golfing groups keep the parent's m.
struct SampledOperator
{
  BlockDictionary dictionary;
  /// Drawn block indices K in draw order. For Gaussian dictionaries these
  /// are the generator stream indices.
  std::vector<Index> draws;
  /// π_{k_j} for every draw (1 for Gaussian draws).
  std::vector<double> draw_pi;
  /// Fresh blocks of a Gaussian dictionary, one per draw, unscaled.
  std::vector<CMatrix> gaussian_blocks;
  std::uint64_t seed = 0;
  Index m = 0;
  /// First row of each draw inside A, plus a final entry equal to rows.
  std::vector<Index> offsets;
  LinearOperator op;

  Index draw_count() const { return static_cast<Index>(draws.size()); }
  Index rows() const { return offsets.empty() ? 0 : offsets.back(); }
  Index cols() const { return dictionary.n(); }
  /// 1/√(m π_{k_j}).
  double scale(Index j) const;
  /// Unscaled dense block of draw j.
  CMatrix dense_draw(Index j) const;
  /// Dense q×n matrix of A.
  CMatrix dense() const;
};

/// K i.i.d. from Π, one generator per draw seeded by (seed, j).
SampledOperator draw_blocks(BlockDictionary const &dict, DrawingDistribution const &pi, Index m, std::uint64_t seed);

/// Sampled operator for a given index list (no randomness), normalized by
/// `m` (defaults to |K|).
SampledOperator sampled_from_indices(BlockDictionary const &dict, DrawingDistribution const &pi,
                                     std::vector<Index> draws, Index m = 0);

/// Row-by-row sampling of an orthogonal A0 with row probabilities P; the
/// same code path as draw_blocks on the singleton partition.
SampledOperator isolated_sampler(LinearOperator const &a0, DrawingDistribution const &p, Index m, std::uint64_t seed);

/// Consecutive groups of draws with sizes m_ℓ. Each group keeps the parent's
/// 1/√(m π) scale.
std::vector<SampledOperator> partition_for_golfing(SampledOperator const &a, std::vector<Index> const &group_sizes);

/// Stack sampled operators sharing one dictionary back into one.
SampledOperator stack_groups(std::vector<SampledOperator> const &groups);

/// k-space coverage of a grid dictionary as an ASCII PGM (P2), 255 where a
/// drawn block touches the pixel and 0 elsewhere. Row r of the parent maps
/// to pixel (r / side, r % side).
std::string sampling_mask_pgm(SampledOperator const &a);

} // namespace bcs
