#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcs/coherence.hpp"
#include "bcs/sampling.hpp"
#include "bcs/solver.hpp"

namespace bcs {

struct DualityConditions
{
  /// ‖(A_S*A_S)^{-1}‖₂→₂, +∞ when A_S*A_S is singular.
  double inv_norm = 0.0;
  /// max_{i∈S^c} ‖A_S*A e_i‖₂.
  double max_col = 0.0;
  bool singular = false;
  bool inv_ok = false;
  bool col_ok = false;
};

DualityConditions duality_conditions(CMatrix const &a, SupportSet const &S);
DualityConditions duality_conditions(SampledOperator const &a, SupportSet const &S);

struct GolfingSchedule
{
  Index L = 0;
  std::vector<Index> sizes;
  std::vector<double> r;
  std::vector<double> t;
};

/// L = 2 + ⌈log s / (2 log 2)⌉ groups; m₁ = m₂ take shares weighted by
/// log(4n)·log(2/ε), groups 3..L by log(2L/ε) split evenly.
/// r₁ = r₂ = 1/(4√log 4n), r_ℓ = 1/4; t₁ = t₂ = 1/(8√s), t_ℓ = log(4n)/(8√s).
GolfingSchedule golfing_schedule(Index s, Index n, Index m, double eps);

struct CertificateReport
{
  double inv_norm = 0.0;
  double max_col = 0.0;
  CVector v;
  double vS_err = 0.0;
  double vSc_inf = 0.0;
  /// ‖w^(ℓ)‖₂ for ℓ = 0..L (entry 0 is ‖e‖₂).
  std::vector<double> contraction;
  /// ‖Id_s − (m/m_ℓ) A_S^(ℓ)* A_S^(ℓ)‖₂→₂ per group.
  std::vector<double> group_norms;
  /// ‖w^(ℓ)‖₂ ≤ r_ℓ‖w^(ℓ−1)‖₂ per group (empty without a schedule).
  std::vector<bool> contraction_ok;
  /// ‖A_{S^c}^(ℓ)* A_S^(ℓ) w^(ℓ−1)‖∞·(m/m_ℓ) ≤ t_ℓ‖w^(ℓ−1)‖₂ per group (empty without a schedule).
  std::vector<bool> off_support_ok;
  bool inv_ok = false;
  bool col_ok = false;
  bool vS_ok = false;
  bool vSc_ok = false;

  bool all_pass() const { return inv_ok && col_ok && vS_ok && vSc_ok; }
};

/// Golfing construction of the dual vector v from disjoint groups of one
/// sampled operator, then the four inexact-duality checks on the stacked A.
CertificateReport golfing_certificate(std::vector<SampledOperator> const &groups, SupportSet const &S, CVector const &e,
                                      GolfingSchedule const *schedule = nullptr);

enum class IdentifiabilityMode
{
  Exhaustive,
  Randomized,
};

struct IdentifiabilityResult
{
  bool identifiable = true;
  /// False for a randomized pass, which is only evidence.
  bool conclusive = true;
  Index subsets_checked = 0;
  /// Column subset T with rank(A_T) < |T|, when one was found.
  std::vector<Index> failing_set;
  /// Nonzero h ∈ Ker A supported on T, and the split h = x − x′ into two
  /// s-sparse vectors with Ax = Ax′.
  CVector h;
  CVector x;
  CVector x_prime;
};

inline constexpr Index kExhaustiveLimit = 1000000;

/// Checks rank(A_T) = |T| over column subsets of size min(2s, n).
/// Exhaustive mode requires C(n, 2s) ≤ 10⁶.
IdentifiabilityResult identifiability_rank_test(CMatrix const &a, Index s, IdentifiabilityMode mode, Index trials = 0,
                                                std::uint64_t seed = 0, Index workers = 1);
IdentifiabilityResult identifiability_rank_test(LinearOperator const &a, Index s, IdentifiabilityMode mode,
                                                Index trials = 0, std::uint64_t seed = 0, Index workers = 1);

/// Binomial coefficient, saturating at the int64 maximum.
std::int64_t binomial(Index n, Index k);

/// x = α ⊗ e₁: s-sparse α with random support in {0..√n−1} and unit-modulus
/// random values, placed on indices a·√n (the first image column).
SparseSignal pathological_signal(Index sqrt_n, Index s, std::uint64_t seed);

/// Embeds α ∈ C^√n as α ⊗ e₁ ∈ C^n.
CVector lift_first_column(CVector const &alpha);

/// Ψ̃_{K,:} = D(π)^{-1/2} Ψ_{K,:}/√m for a sampled line-block operator built
/// from Ψ.
CMatrix line_reduced_matrix(CMatrix const &psi, SampledOperator const &a);

} // namespace bcs
