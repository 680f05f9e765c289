#pragma once

#include <optional>

#include "bcs/coherence.hpp"
#include "bcs/operators.hpp"

namespace bcs {

/// s-sparse vector stored as support + nonzero values.
struct SparseSignal
{
  SparseSignal(SupportSet support, CVector values);

  SupportSet support;
  CVector values;

  Index n() const { return support.n(); }
  CVector dense() const;
};

struct SolverOptions
{
  /// Stop once ‖Az − y‖₂ ≤ feasibility_tol·‖y‖₂ ...
  double feasibility_tol = 1e-9;
  /// ... and ‖z_k − z_{k−1}‖₂ ≤ change_tol·‖z_k‖₂.
  double change_tol = 1e-9;
  Index max_iterations = 50000;
  /// Relative ℓ₂ error counted as exact recovery.
  double success_tol = 1e-5;
};

struct RecoveryResult
{
  CVector estimate;
  Index iterations = 0;
  double residual = 0.0;
  double objective = 0.0;
  bool converged = false;
  std::optional<double> relative_error;
  bool success = false;
};

/// min ‖z‖₁ s.t. Az = y by the primal-dual hybrid gradient method with
/// τ = σ = 0.99/‖A‖. When `reference` is given the result carries the
/// relative error and success flag against it.
RecoveryResult basis_pursuit(LinearOperator const &a, CVector const &y, SolverOptions const &opts = {},
                             CVector const *reference = nullptr);
/// Same iteration on an explicit matrix.
RecoveryResult basis_pursuit(CMatrix const &a, CVector const &y, SolverOptions const &opts = {},
                             CVector const *reference = nullptr);

struct RecoveryCheck
{
  double error = 0.0;
  bool success = false;
};

/// ‖x̂ − x‖₂/‖x‖₂ ≤ tol; for x = 0, ‖x̂‖₂ ≤ tol.
RecoveryCheck check_recovery(CVector const &x, CVector const &estimate, double tol = 1e-5);
RecoveryCheck check_recovery(SparseSignal const &x, RecoveryResult const &result, double tol = 1e-5);

/// 10·log₁₀(peak²·n/‖ref − est‖₂²); +∞ for identical images.
double psnr(RVector const &reference, RVector const &estimate, double peak);

/// z ↦ sign(z)·max(|z| − τ, 0) entrywise.
CVector soft_threshold(CVector const &z, double tau);

} // namespace bcs
