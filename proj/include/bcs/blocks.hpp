#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bcs/operators.hpp"

namespace bcs {

enum class DictionaryKind
{
  DeterministicFinite,
  Gaussian,
};

/// Rows of the parent transform making up one block, each with its
/// multiplicity scale 1/√α_i already applied.
struct BlockRows
{
  std::vector<Index> rows;
  std::vector<double> scales;
};

/// A dictionary of measurement blocks B_1..B_M acting on C^n.
///
/// Deterministic dictionaries are row selections of an orthogonal parent
/// transform, with overlap renormalization folded into the stored blocks.
/// Gaussian dictionaries are generators: every (seed, index) pair yields a
/// fresh p×n block with i.i.d. N(0, 1/p) entries. The drawing rescale
/// 1/√π_k is not stored here; it belongs to the sampled operator.
class BlockDictionary
{
public:
  /// Build from a parent transform and block row sets. `ops` may be empty,
  /// in which case each block is a row selection of the parent.
  static BlockDictionary from_rows(LinearOperator parent, std::vector<BlockRows> blocks,
                                   std::vector<LinearOperator> ops, std::string label, Index grid_side = 0);
  static BlockDictionary gaussian(Index p, Index n);

  DictionaryKind kind() const;
  bool is_gaussian() const { return kind() == DictionaryKind::Gaussian; }
  Index n() const;
  /// Number of blocks M (0 for Gaussian generators).
  Index size() const;
  std::string const &label() const;
  /// Side of the square k-space grid when blocks come from a 2D transform, else 0.
  Index grid_side() const;

  LinearOperator const &parent() const;
  LinearOperator const &block(Index k) const;
  BlockRows const &rows_of(Index k) const;
  Index block_rows(Index k) const;
  /// Σ_k p_k.
  Index total_rows() const;

  /// Dense p_k×n matrix of block k. Uses a lazily materialized copy of the
  /// parent, shared across copies of the dictionary.
  CMatrix dense_block(Index k) const;
  /// Dense parent transform (deterministic dictionaries only).
  CMatrix const &dense_parent() const;

  Index gaussian_p() const;
  /// Gaussian block for stream (seed, index); identical inputs give
  /// bitwise-identical output.
  CMatrix draw_gaussian(std::uint64_t seed, std::uint64_t index) const;

private:
  struct State;
  explicit BlockDictionary(std::shared_ptr<State> state);
  State const &state() const;
  void require_deterministic(char const *what) const;

  std::shared_ptr<State> state_;
};

/// Discrete probability vector over the blocks of a dictionary.
class DrawingDistribution
{
public:
  /// Validates Σ π = 1 within 1e-12 and π_k > 0.
  explicit DrawingDistribution(std::vector<double> probabilities);
  static DrawingDistribution uniform(Index m);
  /// Normalizes positive weights to sum to one.
  static DrawingDistribution from_weights(std::vector<double> const &weights);

  Index size() const { return static_cast<Index>(pi_.size()); }
  double operator[](Index k) const { return pi_[static_cast<std::size_t>(k)]; }
  std::vector<double> const &values() const { return pi_; }
  /// Smallest k with cumulative(k) > u, for u in [0, 1).
  Index sample(double u) const;

private:
  std::vector<double> pi_;
  std::vector<double> cumulative_;
};

/// B_j = rows I_j of an orthogonal A0, for disjoint I_j covering {0..n-1}.
BlockDictionary partition_blocks(LinearOperator const &a0, std::vector<std::vector<Index>> const &index_sets);

/// Possibly overlapping I_j covering {0..n-1}; row i is scaled by 1/√α_i,
/// α_i = |{j : i ∈ I_j}|.
BlockDictionary overlapping_blocks(LinearOperator const &a0, std::vector<std::vector<Index>> const &index_sets);

/// B_k = Ψ_{k,:} ⊗ Ψ, k = 0..√n-1, for square orthogonal Ψ.
BlockDictionary line_blocks(LinearOperator const &psi);

/// Rows and columns of the 2D DFT k-space grid, every row scaled by 1/√2.
/// Blocks 0..√n-1 are grid rows, √n..2√n-1 grid columns.
BlockDictionary rows_and_columns_blocks(Index sqrt_n);

BlockDictionary gaussian_dictionary(Index p, Index n);

/// Singleton partition {0}, {1}, ..., {n-1}.
std::vector<std::vector<Index>> singleton_sets(Index n);
/// Consecutive groups of `size` rows (last group may be shorter).
std::vector<std::vector<Index>> consecutive_sets(Index n, Index size);

/// ‖Σ_k B_k*B_k - Id‖₂→₂. Dense for n ≤ 1024, power iteration above.
double verify_isotropy(BlockDictionary const &dict);

} // namespace bcs
