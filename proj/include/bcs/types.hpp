#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace bcs {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Complex sign: x / |x|, with sign(0) = 0.
inline Complex complex_sign(Complex x)
{
  double const a = std::abs(x);
  return a == 0.0 ? Complex(0.0, 0.0) : x / a;
}

inline CVector complex_sign(CVector const &x)
{
  return x.unaryExpr([](Complex v) { return complex_sign(v); });
}

inline double l1_norm(CVector const &x) { return x.cwiseAbs().sum(); }

} // namespace bcs
