#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "bcs/operators.hpp"
#include "bcs/random.hpp"

namespace testing {

using bcs::CMatrix;
using bcs::Complex;
using bcs::CVector;
using bcs::Index;

inline CVector random_vector(bcs::Rng &rng, Index n)
{
  CVector v(n);
  for (Index i = 0; i < n; ++i) { v[i] = Complex(rng.normal(), rng.normal()); }
  return v;
}

inline CMatrix random_matrix(bcs::Rng &rng, Index rows, Index cols)
{
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) { m(i, j) = Complex(rng.normal(), rng.normal()); }
  }
  return m;
}

/// Textbook Kronecker product, entry (i·rb + k, j·cb + l) = a(i,j)·b(k,l).
inline CMatrix kron_dense(CMatrix const &a, CMatrix const &b)
{
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) { out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b; }
  }
  return out;
}

/// Unitary DFT matrix from its closed form.
inline CMatrix dft_dense(Index d)
{
  CMatrix f(d, d);
  for (Index p = 0; p < d; ++p) {
    for (Index l = 0; l < d; ++l) {
      double const ang = -2.0 * std::numbers::pi * static_cast<double>(p * l) / static_cast<double>(d);
      f(p, l) = std::polar(1.0 / std::sqrt(static_cast<double>(d)), ang);
    }
  }
  return f;
}

/// max |⟨Ax, y⟩ − ⟨x, A*y⟩| / (‖x‖‖y‖) over `pairs` random pairs.
inline double adjoint_gap(bcs::LinearOperator const &op, bcs::Rng &rng, int pairs = 10)
{
  double worst = 0.0;
  for (int t = 0; t < pairs; ++t) {
    CVector const x = random_vector(rng, op.cols());
    CVector const y = random_vector(rng, op.rows());
    Complex const lhs = y.dot(op.forward(x));
    Complex const rhs = op.adjoint(y).dot(x);
    worst = std::max(worst, std::abs(lhs - rhs) / (x.norm() * y.norm()));
  }
  return worst;
}

/// Spectral norm of a dense matrix through its singular values.
inline double svd_norm(CMatrix const &m)
{
  if (m.size() == 0) { return 0.0; }
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

inline std::vector<Index> iota(Index from, Index to)
{
  std::vector<Index> out;
  for (Index i = from; i < to; ++i) { out.push_back(i); }
  return out;
}

struct L1Oracle
{
  double objective = std::numeric_limits<double>::infinity();
  CVector solution;
};

/// min ‖z‖₁ s.t. Az = y over every support of size ≤ rows(A): least squares
/// on each full-rank column subset, kept when it reproduces y. For real data
/// the ℓ₁ minimum sits on such a basic solution.
inline L1Oracle l1_bruteforce(CMatrix const &a, CVector const &y, double feas = 1e-10)
{
  L1Oracle best;
  Index const n = a.cols();
  Index const cap = std::min(a.rows(), n);
  if (y.norm() == 0.0) {
    best.objective = 0.0;
    best.solution = CVector::Zero(n);
    return best;
  }
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<Index> cols;
    for (Index i = 0; i < n; ++i) {
      if (mask & (1u << i)) { cols.push_back(i); }
    }
    if (static_cast<Index>(cols.size()) > cap) { continue; }
    CMatrix sub(a.rows(), static_cast<Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) { sub.col(static_cast<Index>(j)) = a.col(cols[j]); }
    Eigen::ColPivHouseholderQR<CMatrix> qr(sub);
    if (qr.rank() < sub.cols()) { continue; }
    CVector const c = qr.solve(y);
    if ((sub * c - y).norm() > feas * y.norm()) { continue; }
    double const obj = c.cwiseAbs().sum();
    if (obj < best.objective) {
      best.objective = obj;
      best.solution = CVector::Zero(n);
      for (std::size_t j = 0; j < cols.size(); ++j) { best.solution[cols[j]] = c[static_cast<Index>(j)]; }
    }
  }
  return best;
}

} // namespace testing
