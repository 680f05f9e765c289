#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>

#include "bcs/operators.hpp"
#include "support.hpp"

using namespace bcs;
using namespace testing;

TEST_CASE("dft of size one is the identity")
{
  CHECK(std::abs(materialize(dft_operator(1))(0, 0) - Complex(1.0, 0.0)) < 1e-15);
}

TEST_CASE("dft maps the first canonical vector to a constant")
{
  CVector e = CVector::Zero(4);
  e[0] = 1.0;
  CVector const y = dft_operator(4).forward(e);
  for (Index i = 0; i < 4; ++i) { CHECK(std::abs(y[i] - Complex(0.5, 0.0)) < 1e-15); }
}

TEST_CASE("dft matches its closed form and is unitary")
{
  for (Index d : {2, 3, 5, 8, 16, 31, 64}) {
    CMatrix const f = materialize(dft_operator(d));
    CHECK((f - dft_dense(d)).cwiseAbs().maxCoeff() < 1e-12);
    double const dev = svd_norm(f.adjoint() * f - CMatrix::Identity(d, d));
    CHECK(dev <= 1e-10);
    if (d == 8) { CHECK(dev <= 1e-12); }
    CHECK(std::abs(f.cwiseAbs().maxCoeff() - 1.0 / std::sqrt(double(d))) < 1e-14);
  }
}

TEST_CASE("adjoint consistency of every operator")
{
  Rng rng(11);
  CMatrix const dense = random_matrix(rng, 5, 7);
  CVector const diag = random_vector(rng, 6);
  std::vector<LinearOperator> ops = {
    identity_operator(5),
    dense_operator(dense),
    diagonal_operator(diag),
    scaled_operator(dense_operator(dense), -2.5),
    dft_operator(12),
    kron(dft_operator(3), dense_operator(dense)),
    kron(dense_operator(dense), dft_operator(4)),
    direct_sum(dense_operator(dense), dft_operator(3)),
    block_diag_example(9),
    row_select(dft_operator(10), {7, 1, 3}, {1.0, 0.5, 2.0}),
    vstack({dft_operator(7), dense_operator(dense), identity_operator(7)}),
    function_operator(
      5, 7, [&](CVector const &x) { return CVector(dense * x); }, [&](CVector const &y) { return CVector(dense.adjoint() * y); },
      "fn"),
  };
  for (auto const &op : ops) {
    INFO(op.describe());
    CHECK(adjoint_gap(op, rng, 12) <= 1e-10);
  }
}

TEST_CASE("materialization agrees with the forward map column by column")
{
  Rng rng(5);
  auto const op = kron(dense_operator(random_matrix(rng, 3, 2)), dft_operator(4));
  CMatrix const m = materialize(op);
  for (Index j = 0; j < op.cols(); ++j) {
    CVector e = CVector::Zero(op.cols());
    e[j] = 1.0;
    CHECK((m.col(j) - op.forward(e)).norm() <= 1e-12);
  }
}

TEST_CASE("kron of identities is the identity")
{
  CMatrix const m = materialize(kron(identity_operator(2), identity_operator(3)));
  CHECK(m.rows() == 6);
  CHECK((m - CMatrix::Identity(6, 6)).norm() == 0.0);
}

TEST_CASE("kron acts on tensor products factorwise")
{
  Rng rng(7);
  for (int t = 0; t < 5; ++t) {
    CMatrix const a = random_matrix(rng, 3, 4);
    CMatrix const b = random_matrix(rng, 2, 5);
    CVector const x = random_vector(rng, 4);
    CVector const y = random_vector(rng, 5);
    CVector const lhs = kron(dense_operator(a), dense_operator(b)).forward(kron_dense(x, y));
    CVector const rhs = kron_dense(a * x, b * y);
    CHECK((lhs - rhs).norm() <= 1e-10 * rhs.norm());
  }
}

TEST_CASE("kron of dft factors equals the dense 2D DFT")
{
  CMatrix const f = dft_dense(4);
  CMatrix const two_d = kron_dense(f, f);
  CHECK((materialize(kron(dft_operator(4), dft_operator(4))) - two_d).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("kron is associative")
{
  Rng rng(3);
  auto a = dense_operator(random_matrix(rng, 2, 3));
  auto b = dense_operator(random_matrix(rng, 3, 2));
  auto c = dft_operator(3);
  CMatrix const left = materialize(kron(kron(a, b), c));
  CMatrix const right = materialize(kron(a, kron(b, c)));
  CHECK((left - right).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("kron rejects overflowing dimensions")
{
  Index const big = Index{1} << 40;
  auto huge = function_operator(
    big, 1, [](CVector const &x) { return x; }, [](CVector const &x) { return x; }, "huge");
  CHECK_THROWS_AS(kron(huge, huge), std::overflow_error);
}

TEST_CASE("block diagonal example")
{
  CHECK((materialize(block_diag_example(2)) - CMatrix::Identity(2, 2)).norm() < 1e-15);
  CMatrix const a = materialize(block_diag_example(8));
  CHECK(svd_norm(a.adjoint() * a - CMatrix::Identity(8, 8)) <= 1e-12);
  CHECK(std::abs(a.row(0).cwiseAbs2().maxCoeff() - 1.0) < 1e-15);
  for (Index j = 1; j < 8; ++j) { CHECK(std::abs(a.row(j).cwiseAbs2().maxCoeff() - 1.0 / 7.0) < 1e-14); }
  CHECK_THROWS_AS(block_diag_example(1), std::invalid_argument);
}

TEST_CASE("operator norm")
{
  CHECK(std::abs(operator_norm(identity_operator(6)).value - 1.0) < 1e-12);
  CVector d(3);
  d << 3.0, 1.0, 0.5;
  CHECK(std::abs(operator_norm(diagonal_operator(d)).value - 3.0) < 1e-8 * 3.0);
  Rng rng(99);
  for (int t = 0; t < 5; ++t) {
    CMatrix const m = random_matrix(rng, 12, 8);
    auto const est = operator_norm(dense_operator(m), 1e-8);
    double const exact = svd_norm(m);
    CHECK(est.converged);
    CHECK(std::abs(est.value - exact) <= 1e-8 * exact);
    CHECK(std::abs(spectral_norm(m) - exact) <= 1e-12 * exact);
  }
}

TEST_CASE("operator norm reports non-convergence at the cap")
{
  CVector d(2);
  d << 1.0, 0.999999;
  auto const est = operator_norm(diagonal_operator(d), 1e-14, 3);
  CHECK_FALSE(est.converged);
  CHECK(est.iterations == 3);
}

TEST_CASE("input validation")
{
  CHECK_THROWS_AS(dft_operator(4).forward(CVector::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(dft_operator(4).adjoint(CVector::Zero(5)), std::invalid_argument);
  CHECK_THROWS_AS(dense_operator(CMatrix(0, 0)), std::invalid_argument);
  CMatrix bad = CMatrix::Identity(2, 2);
  bad(0, 1) = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(dense_operator(bad), std::invalid_argument);
  CHECK_THROWS_AS(vstack({dft_operator(3), dft_operator(4)}), std::invalid_argument);
  CHECK_THROWS_AS(row_select(dft_operator(3), {3}, {1.0}), std::invalid_argument);
}
