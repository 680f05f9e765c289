#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcs/blocks.hpp"

namespace bcs {

/// Sorted, duplicate-free support S ⊂ {0..n-1}.
class SupportSet
{
public:
  SupportSet(std::vector<Index> indices, Index n);

  Index n() const { return n_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  std::vector<Index> const &indices() const { return indices_; }
  std::vector<Index> complement() const;
  bool contains(Index i) const;

private:
  std::vector<Index> indices_;
  Index n_;
};

enum class CoherenceMode
{
  Exact,
  MonteCarlo,
};

struct MonteCarloOptions
{
  Index trials = 10000;
  double quantile = 0.99;
  std::uint64_t seed = 0;
};

/// μ₁..μ₄ and γ = max(μ₁, μ₂, μ₃) for one (dictionary, Π, S).
struct CoherenceReport
{
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double mu4 = 0.0;
  double gamma = 0.0;
  Index s = 0;
  CoherenceMode mode = CoherenceMode::Exact;
  Index trials = 0;
  double quantile = 0.0;
  // Diagnostics: block attaining μ₁, μ₂, μ₄ and the off-support column attaining μ₂, μ₃.
  Index mu1_block = -1;
  Index mu2_block = -1;
  Index mu2_column = -1;
  Index mu3_column = -1;
  Index mu4_block = -1;
};

/// max_k ‖B_{k,S}* B_{k,S}‖₂→₂ / π_k.
double mu1(BlockDictionary const &dict, DrawingDistribution const &pi, SupportSet const &S);
/// √s · max_k max_{i∈S^c} ‖B_{k,S}* B_k e_i‖₂ / π_k.
double mu2(BlockDictionary const &dict, DrawingDistribution const &pi, SupportSet const &S);
/// s · max_{i∈S^c} ‖Σ_k B_{k,S}*(B_k e_i)(B_k e_i)*B_{k,S} / π_k‖₂→₂; s/p for Gaussian blocks.
double mu3(BlockDictionary const &dict, DrawingDistribution const &pi, SupportSet const &S);
/// max_k ‖B_k*B_k‖₁→∞ / π_k.
double mu4(BlockDictionary const &dict, DrawingDistribution const &pi);

/// ‖M‖₁→∞ = max |M_ij|.
double norm_1_to_inf(CMatrix const &m);
/// ‖B*B‖₁→∞ computed from B without forming B*B (max squared column norm).
double gram_1_to_inf(CMatrix const &b);
/// Per-block ‖B_k*B_k‖₁→∞ of a deterministic dictionary.
std::vector<double> block_gram_norms(BlockDictionary const &dict);

/// Full report. Deterministic dictionaries are exact; Gaussian dictionaries
/// report μ₁, μ₂, μ₄ as Monte-Carlo quantiles and μ₃ = s/p exactly.
CoherenceReport gamma(BlockDictionary const &dict, DrawingDistribution const &pi, SupportSet const &S,
                      MonteCarloOptions const &mc = {});

/// Monte-Carlo estimate of μ₃ for a Gaussian dictionary.
struct Mu3Estimate
{
  /// s · max over i ∈ S^c of the per-column empirical expectation.
  double per_column_max = 0.0;
  /// s · ‖average over i ∈ S^c of the per-column expectations‖; the columns
  /// of a Gaussian block are exchangeable, so every column has the same
  /// expectation and pooling is an unbiased use of all draws.
  double pooled = 0.0;
  Index trials = 0;
};
Mu3Estimate mu3_monte_carlo(BlockDictionary const &dict, SupportSet const &S, Index trials, std::uint64_t seed);

/// π*_j ∝ ‖B_j*B_j‖₁→∞.
DrawingDistribution optimal_pi(BlockDictionary const &dict);

inline constexpr double kTheoremConstant = 3.0 * 534.0;
inline constexpr double kProofConstant = 534.0;

/// c γ log(4n) log(12/ε), natural logs.
double required_blocks(double gamma, Index n, double eps, double c = kTheoremConstant);
/// Unsimplified proof bound: c γ (2 log(4n) log(12/ε) + log s · log(12 e log(s) / ε)).
double required_blocks_proof(double gamma, Index n, Index s, double eps, double c = kProofConstant);

struct UpsilonResult
{
  double value = 0.0;
  /// True when computed by full ±1 sign enumeration (p ≤ 20); false when
  /// the √p‖B̄_S‖₂→₂ upper bound is returned instead.
  bool exact = false;
  /// Row renormalization applied before restricting to S.
  std::string row_normalization = "unit-l2";
};

inline constexpr Index kUpsilonExactRows = 20;

/// ‖B̄_S‖₂→₁ where B̄ has unit-ℓ₂ rows and B̄_S keeps the columns in S.
/// Evaluated as max over σ ∈ {±1}^p of ‖B̄_S* σ‖₂.
UpsilonResult upsilon_pdg(LinearOperator const &a0, SupportSet const &S, LinearOperator const &block);

} // namespace bcs
