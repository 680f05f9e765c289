#include "bcs/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bcs {

SparseSignal::SparseSignal(SupportSet support_, CVector values_)
  : support(std::move(support_))
  , values(std::move(values_))
{
  if (values.size() != support.size()) { throw std::invalid_argument("SparseSignal: one value per support index"); }
  for (Index i = 0; i < values.size(); ++i) {
    if (values[i] == Complex(0.0, 0.0)) { throw std::invalid_argument("SparseSignal: zero value on the support"); }
  }
}

CVector SparseSignal::dense() const
{
  CVector x = CVector::Zero(n());
  auto const &idx = support.indices();
  for (std::size_t j = 0; j < idx.size(); ++j) { x[idx[j]] = values[static_cast<Index>(j)]; }
  return x;
}

CVector soft_threshold(CVector const &z, double tau)
{
  return z.unaryExpr([tau](Complex v) {
    double const a = std::abs(v);
    return a <= tau ? Complex(0.0, 0.0) : v * ((a - tau) / a);
  });
}

namespace {

template <typename Fwd, typename Adj>
RecoveryResult pdhg(Index rows, Index cols, Fwd fwd, Adj adj, double norm, CVector const &y, SolverOptions const &opts,
                    CVector const *reference)
{
  if (y.size() != rows) { throw std::invalid_argument("basis_pursuit: y length does not match A"); }
  if (reference && reference->size() != cols) { throw std::invalid_argument("basis_pursuit: reference length mismatch"); }
  if (opts.max_iterations < 1 || !(opts.feasibility_tol > 0.0) || !(opts.change_tol > 0.0)) {
    throw std::invalid_argument("basis_pursuit: invalid solver options");
  }
  RecoveryResult res;
  double const ynorm = y.norm();
  if (!(norm > 0.0)) { throw std::invalid_argument("basis_pursuit: zero operator"); }
  if (ynorm == 0.0) {
    res.estimate = CVector::Zero(cols);
    res.converged = true;
  } else {
    double const tau = 0.99 / norm;
    double const sigma = 0.99 / norm;
    CVector z = CVector::Zero(cols);
    CVector u = CVector::Zero(rows);
    CVector az = CVector::Zero(rows);
    CVector az_bar = az;
    CVector z_new(cols);
    CVector az_new(rows);
    Index it = 0;
    double residual = ynorm;
    while (it < opts.max_iterations) {
      ++it;
      u.noalias() += sigma * (az_bar - y);
      z_new = soft_threshold(z - tau * adj(u), tau);
      az_new = fwd(z_new);
      double const change = (z_new - z).norm();
      residual = (az_new - y).norm();
      az_bar = 2.0 * az_new - az;
      z.swap(z_new);
      az.swap(az_new);
      if (residual <= opts.feasibility_tol * ynorm && change <= opts.change_tol * z.norm()) {
        res.converged = true;
        break;
      }
    }
    res.estimate = std::move(z);
    res.iterations = it;
    res.residual = residual;
  }
  res.objective = l1_norm(res.estimate);
  if (reference) {
    auto const chk = check_recovery(*reference, res.estimate, opts.success_tol);
    res.relative_error = chk.error;
    res.success = chk.success;
  }
  return res;
}

} // namespace

RecoveryResult basis_pursuit(LinearOperator const &a, CVector const &y, SolverOptions const &opts,
                             CVector const *reference)
{
  if (a.empty()) { throw std::invalid_argument("basis_pursuit: empty operator"); }
  double const norm = operator_norm(a).value;
  return pdhg(
    a.rows(), a.cols(), [&a](CVector const &z) { return a.forward(z); }, [&a](CVector const &u) { return a.adjoint(u); },
    norm, y, opts, reference);
}

RecoveryResult basis_pursuit(CMatrix const &a, CVector const &y, SolverOptions const &opts, CVector const *reference)
{
  if (a.size() == 0) { throw std::invalid_argument("basis_pursuit: empty matrix"); }
  auto fwd = [&a](CVector const &z) { return CVector(a * z); };
  auto adj = [&a](CVector const &u) { return CVector(a.adjoint() * u); };
  double const norm = operator_norm(function_operator(a.rows(), a.cols(), fwd, adj, "dense")).value;
  return pdhg(a.rows(), a.cols(), fwd, adj, norm, y, opts, reference);
}

RecoveryCheck check_recovery(CVector const &x, CVector const &estimate, double tol)
{
  if (x.size() != estimate.size()) { throw std::invalid_argument("check_recovery: length mismatch"); }
  RecoveryCheck c;
  double const xn = x.norm();
  c.error = xn == 0.0 ? estimate.norm() : (estimate - x).norm() / xn;
  c.success = c.error <= tol;
  return c;
}

RecoveryCheck check_recovery(SparseSignal const &x, RecoveryResult const &result, double tol)
{
  return check_recovery(x.dense(), result.estimate, tol);
}

double psnr(RVector const &reference, RVector const &estimate, double peak)
{
  if (reference.size() != estimate.size() || reference.size() == 0) {
    throw std::invalid_argument("psnr: images must have the same nonzero length");
  }
  if (!(peak > 0.0)) { throw std::invalid_argument("psnr: peak must be positive"); }
  double const err = (reference - estimate).squaredNorm();
  if (err == 0.0) { return std::numeric_limits<double>::infinity(); }
  return 10.0 * std::log10(peak * peak * static_cast<double>(reference.size()) / err);
}

} // namespace bcs
