#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bcs/types.hpp"

namespace bcs {

/// Matrix-free linear map C^cols -> C^rows with its adjoint.
///
/// Operators are immutable values sharing their implementation; copying is
/// cheap and concurrent forward/adjoint calls are safe.
class LinearOperator
{
public:
  class Impl
  {
  public:
    virtual ~Impl() = default;
    virtual Index rows() const = 0;
    virtual Index cols() const = 0;
    virtual void forward(CVector const &x, CVector &y) const = 0;
    virtual void adjoint(CVector const &y, CVector &x) const = 0;
    virtual std::string describe() const = 0;
  };

  LinearOperator() = default;
  explicit LinearOperator(std::shared_ptr<Impl const> impl);

  Index rows() const;
  Index cols() const;
  bool empty() const { return impl_ == nullptr; }

  /// Throws std::invalid_argument on a length mismatch.
  CVector forward(CVector const &x) const;
  CVector adjoint(CVector const &y) const;
  std::string describe() const;

private:
  std::shared_ptr<Impl const> impl_;
};

LinearOperator identity_operator(Index n);

using ApplyFn = std::function<CVector(CVector const &)>;
/// Operator from a pair of callables (forward, adjoint).
LinearOperator function_operator(Index rows, Index cols, ApplyFn forward, ApplyFn adjoint, std::string name);
LinearOperator dense_operator(CMatrix matrix);
LinearOperator diagonal_operator(CVector diagonal);
LinearOperator scaled_operator(LinearOperator op, double scale);

/// Unitary DFT of size dim: entry (p, l) = exp(-2iπ p l / dim) / √dim,
/// 0-based frequencies, DC at index 0.
LinearOperator dft_operator(Index dim);

/// A ⊗ B applied through (A ⊗ B) vec(X) = vec(B X Aᵀ) with column-major vec.
/// Throws std::overflow_error if the dimensions overflow.
LinearOperator kron(LinearOperator const &a, LinearOperator const &b);

/// Block-diagonal direct sum diag(A, B).
LinearOperator direct_sum(LinearOperator const &a, LinearOperator const &b);

/// The n×n orthogonal matrix diag(1, F_{n-1}) with F the unitary DFT.
LinearOperator block_diag_example(Index n);

/// Rows `rows` of `parent`, row r scaled by `scales[r]`.
LinearOperator row_select(LinearOperator parent, std::vector<Index> rows, std::vector<double> scales);

/// Vertical stack of operators with a common column count.
LinearOperator vstack(std::vector<LinearOperator> parts);

/// Dense matrix of an operator, built column by column.
CMatrix materialize(LinearOperator const &op);

struct NormEstimate
{
  double value = 0.0;
  Index iterations = 0;
  bool converged = false;
};

inline constexpr Index kPowerIterationCap = 10000;

/// Largest singular value by power iteration on A*A. On hitting the cap the
/// last iterate is returned with converged = false.
NormEstimate operator_norm(LinearOperator const &op, double tol = 1e-8, Index max_iterations = kPowerIterationCap);

/// Exact spectral norm of a dense matrix via SVD.
double spectral_norm(CMatrix const &m);

/// Largest eigenvalue magnitude of a Hermitian matrix.
double hermitian_norm(CMatrix const &m);

} // namespace bcs
