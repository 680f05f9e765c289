#include "bcs/operators.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bcs/random.hpp"

namespace bcs {

LinearOperator::LinearOperator(std::shared_ptr<Impl const> impl)
  : impl_(std::move(impl))
{
  if (!impl_) { throw std::invalid_argument("LinearOperator: null implementation"); }
}

Index LinearOperator::rows() const { return impl_ ? impl_->rows() : 0; }
Index LinearOperator::cols() const { return impl_ ? impl_->cols() : 0; }

CVector LinearOperator::forward(CVector const &x) const
{
  if (!impl_) { throw std::logic_error("LinearOperator: empty operator"); }
  if (x.size() != impl_->cols()) {
    std::ostringstream msg;
    msg << "forward: expected length " << impl_->cols() << ", got " << x.size();
    throw std::invalid_argument(msg.str());
  }
  CVector y(impl_->rows());
  impl_->forward(x, y);
  return y;
}

CVector LinearOperator::adjoint(CVector const &y) const
{
  if (!impl_) { throw std::logic_error("LinearOperator: empty operator"); }
  if (y.size() != impl_->rows()) {
    std::ostringstream msg;
    msg << "adjoint: expected length " << impl_->rows() << ", got " << y.size();
    throw std::invalid_argument(msg.str());
  }
  CVector x(impl_->cols());
  impl_->adjoint(y, x);
  return x;
}

std::string LinearOperator::describe() const { return impl_ ? impl_->describe() : "empty"; }

namespace {

class Identity final : public LinearOperator::Impl
{
public:
  explicit Identity(Index n)
    : n_(n)
  {
  }
  Index rows() const override { return n_; }
  Index cols() const override { return n_; }
  void forward(CVector const &x, CVector &y) const override { y = x; }
  void adjoint(CVector const &y, CVector &x) const override { x = y; }
  std::string describe() const override { return "identity(" + std::to_string(n_) + ")"; }

private:
  Index n_;
};

class Dense final : public LinearOperator::Impl
{
public:
  explicit Dense(CMatrix m)
    : m_(std::move(m))
  {
  }
  Index rows() const override { return m_.rows(); }
  Index cols() const override { return m_.cols(); }
  void forward(CVector const &x, CVector &y) const override { y.noalias() = m_ * x; }
  void adjoint(CVector const &y, CVector &x) const override { x.noalias() = m_.adjoint() * y; }
  std::string describe() const override
  {
    return "dense(" + std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()) + ")";
  }

private:
  CMatrix m_;
};

class Diagonal final : public LinearOperator::Impl
{
public:
  explicit Diagonal(CVector d)
    : d_(std::move(d))
  {
  }
  Index rows() const override { return d_.size(); }
  Index cols() const override { return d_.size(); }
  void forward(CVector const &x, CVector &y) const override { y = d_.cwiseProduct(x); }
  void adjoint(CVector const &y, CVector &x) const override { x = d_.conjugate().cwiseProduct(y); }
  std::string describe() const override { return "diag(" + std::to_string(d_.size()) + ")"; }

private:
  CVector d_;
};

class Scaled final : public LinearOperator::Impl
{
public:
  Scaled(LinearOperator op, double scale)
    : op_(std::move(op))
    , scale_(scale)
  {
  }
  Index rows() const override { return op_.rows(); }
  Index cols() const override { return op_.cols(); }
  void forward(CVector const &x, CVector &y) const override { y = scale_ * op_.forward(x); }
  void adjoint(CVector const &y, CVector &x) const override { x = scale_ * op_.adjoint(y); }
  std::string describe() const override { return std::to_string(scale_) + "*" + op_.describe(); }

private:
  LinearOperator op_;
  double scale_;
};

class Dft final : public LinearOperator::Impl
{
public:
  explicit Dft(Index dim)
    : dim_(dim)
    , twiddle_(dim)
  {
    double const norm = 1.0 / std::sqrt(static_cast<double>(dim));
    for (Index k = 0; k < dim; ++k) {
      double const angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(dim);
      twiddle_(k) = norm * Complex(std::cos(angle), std::sin(angle));
    }
  }
  Index rows() const override { return dim_; }
  Index cols() const override { return dim_; }
  void forward(CVector const &x, CVector &y) const override
  {
    for (Index p = 0; p < dim_; ++p) {
      Complex acc(0.0, 0.0);
      Index k = 0;
      for (Index l = 0; l < dim_; ++l) {
        acc += twiddle_(k) * x(l);
        k += p;
        if (k >= dim_) { k -= dim_; }
      }
      y(p) = acc;
    }
  }
  void adjoint(CVector const &y, CVector &x) const override
  {
    for (Index l = 0; l < dim_; ++l) {
      Complex acc(0.0, 0.0);
      Index k = 0;
      for (Index p = 0; p < dim_; ++p) {
        acc += std::conj(twiddle_(k)) * y(p);
        k += l;
        if (k >= dim_) { k -= dim_; }
      }
      x(l) = acc;
    }
  }
  std::string describe() const override { return "dft(" + std::to_string(dim_) + ")"; }

private:
  Index dim_;
  CVector twiddle_;
};

class Kronecker final : public LinearOperator::Impl
{
public:
  Kronecker(LinearOperator a, LinearOperator b)
    : a_(std::move(a))
    , b_(std::move(b))
  {
  }
  Index rows() const override { return a_.rows() * b_.rows(); }
  Index cols() const override { return a_.cols() * b_.cols(); }

  void forward(CVector const &x, CVector &y) const override
  {
    apply(x, y, a_, b_, false);
  }
  void adjoint(CVector const &y, CVector &x) const override
  {
    apply(y, x, a_, b_, true);
  }
  std::string describe() const override { return "kron(" + a_.describe() + ", " + b_.describe() + ")"; }

private:
  // out = vec(B X Aᵀ) for X = reshape(in, B.cols, A.cols), or the adjoint.
  static void apply(CVector const &in, CVector &out, LinearOperator const &a, LinearOperator const &b, bool adj)
  {
    Index const b_in = adj ? b.rows() : b.cols();
    Index const b_out = adj ? b.cols() : b.rows();
    Index const a_in = adj ? a.rows() : a.cols();
    Index const a_out = adj ? a.cols() : a.rows();
    Eigen::Map<CMatrix const> x(in.data(), b_in, a_in);
    CMatrix z(b_out, a_in);
    for (Index j = 0; j < a_in; ++j) {
      CVector col = x.col(j);
      z.col(j) = adj ? b.adjoint(col) : b.forward(col);
    }
    Eigen::Map<CMatrix> y(out.data(), b_out, a_out);
    for (Index r = 0; r < b_out; ++r) {
      CVector row = z.row(r).transpose();
      y.row(r) = (adj ? a.adjoint(row) : a.forward(row)).transpose();
    }
  }

  LinearOperator a_, b_;
};

class DirectSum final : public LinearOperator::Impl
{
public:
  DirectSum(LinearOperator a, LinearOperator b)
    : a_(std::move(a))
    , b_(std::move(b))
  {
  }
  Index rows() const override { return a_.rows() + b_.rows(); }
  Index cols() const override { return a_.cols() + b_.cols(); }
  void forward(CVector const &x, CVector &y) const override
  {
    y.head(a_.rows()) = a_.forward(x.head(a_.cols()));
    y.tail(b_.rows()) = b_.forward(x.tail(b_.cols()));
  }
  void adjoint(CVector const &y, CVector &x) const override
  {
    x.head(a_.cols()) = a_.adjoint(y.head(a_.rows()));
    x.tail(b_.cols()) = b_.adjoint(y.tail(b_.rows()));
  }
  std::string describe() const override { return "diag(" + a_.describe() + ", " + b_.describe() + ")"; }

private:
  LinearOperator a_, b_;
};

class RowSelect final : public LinearOperator::Impl
{
public:
  RowSelect(LinearOperator parent, std::vector<Index> rows, std::vector<double> scales)
    : parent_(std::move(parent))
    , rows_(std::move(rows))
    , scales_(std::move(scales))
  {
  }
  Index rows() const override { return static_cast<Index>(rows_.size()); }
  Index cols() const override { return parent_.cols(); }
  void forward(CVector const &x, CVector &y) const override
  {
    CVector const full = parent_.forward(x);
    for (std::size_t r = 0; r < rows_.size(); ++r) { y(static_cast<Index>(r)) = scales_[r] * full(rows_[r]); }
  }
  void adjoint(CVector const &y, CVector &x) const override
  {
    CVector full = CVector::Zero(parent_.rows());
    for (std::size_t r = 0; r < rows_.size(); ++r) { full(rows_[r]) += scales_[r] * y(static_cast<Index>(r)); }
    x = parent_.adjoint(full);
  }
  std::string describe() const override
  {
    return "rows[" + std::to_string(rows_.size()) + "](" + parent_.describe() + ")";
  }

private:
  LinearOperator parent_;
  std::vector<Index> rows_;
  std::vector<double> scales_;
};

class VStack final : public LinearOperator::Impl
{
public:
  explicit VStack(std::vector<LinearOperator> parts)
    : parts_(std::move(parts))
  {
    for (auto const &p : parts_) { rows_ += p.rows(); }
  }
  Index rows() const override { return rows_; }
  Index cols() const override { return parts_.front().cols(); }
  void forward(CVector const &x, CVector &y) const override
  {
    Index offset = 0;
    for (auto const &p : parts_) {
      y.segment(offset, p.rows()) = p.forward(x);
      offset += p.rows();
    }
  }
  void adjoint(CVector const &y, CVector &x) const override
  {
    x.setZero(cols());
    Index offset = 0;
    for (auto const &p : parts_) {
      x += p.adjoint(y.segment(offset, p.rows()));
      offset += p.rows();
    }
  }
  std::string describe() const override { return "vstack[" + std::to_string(parts_.size()) + "]"; }

private:
  std::vector<LinearOperator> parts_;
  Index rows_ = 0;
};

class Functional final : public LinearOperator::Impl
{
public:
  Functional(Index rows, Index cols, ApplyFn fwd, ApplyFn adj, std::string name)
    : rows_(rows)
    , cols_(cols)
    , fwd_(std::move(fwd))
    , adj_(std::move(adj))
    , name_(std::move(name))
  {
  }
  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  void forward(CVector const &x, CVector &y) const override { y = fwd_(x); }
  void adjoint(CVector const &y, CVector &x) const override { x = adj_(y); }
  std::string describe() const override { return name_; }

private:
  Index rows_, cols_;
  ApplyFn fwd_, adj_;
  std::string name_;
};

void require_positive(Index n, char const *what)
{
  if (n < 1) { throw std::invalid_argument(std::string(what) + ": dimension must be >= 1"); }
}

} // namespace

LinearOperator identity_operator(Index n)
{
  require_positive(n, "identity_operator");
  return LinearOperator(std::make_shared<Identity>(n));
}

LinearOperator function_operator(Index rows, Index cols, ApplyFn forward, ApplyFn adjoint, std::string name)
{
  require_positive(rows, "function_operator");
  require_positive(cols, "function_operator");
  return LinearOperator(std::make_shared<Functional>(rows, cols, std::move(forward), std::move(adjoint), std::move(name)));
}

LinearOperator dense_operator(CMatrix matrix)
{
  if (matrix.rows() < 1 || matrix.cols() < 1) { throw std::invalid_argument("dense_operator: empty matrix"); }
  if (!matrix.allFinite()) { throw std::invalid_argument("dense_operator: non-finite entries"); }
  return LinearOperator(std::make_shared<Dense>(std::move(matrix)));
}

LinearOperator diagonal_operator(CVector diagonal)
{
  require_positive(diagonal.size(), "diagonal_operator");
  return LinearOperator(std::make_shared<Diagonal>(std::move(diagonal)));
}

LinearOperator scaled_operator(LinearOperator op, double scale)
{
  return LinearOperator(std::make_shared<Scaled>(std::move(op), scale));
}

LinearOperator dft_operator(Index dim)
{
  require_positive(dim, "dft_operator");
  return LinearOperator(std::make_shared<Dft>(dim));
}

LinearOperator kron(LinearOperator const &a, LinearOperator const &b)
{
  Index rows = 0, cols = 0;
  if (__builtin_mul_overflow(a.rows(), b.rows(), &rows) || __builtin_mul_overflow(a.cols(), b.cols(), &cols)) {
    throw std::overflow_error("kron: dimension overflow");
  }
  return LinearOperator(std::make_shared<Kronecker>(a, b));
}

LinearOperator direct_sum(LinearOperator const &a, LinearOperator const &b)
{
  return LinearOperator(std::make_shared<DirectSum>(a, b));
}

LinearOperator block_diag_example(Index n)
{
  if (n < 2) { throw std::invalid_argument("block_diag_example: n must be >= 2"); }
  return direct_sum(identity_operator(1), dft_operator(n - 1));
}

LinearOperator row_select(LinearOperator parent, std::vector<Index> rows, std::vector<double> scales)
{
  if (rows.empty()) { throw std::invalid_argument("row_select: empty row set"); }
  if (scales.empty()) { scales.assign(rows.size(), 1.0); }
  if (scales.size() != rows.size()) { throw std::invalid_argument("row_select: scales/rows length mismatch"); }
  for (Index r : rows) {
    if (r < 0 || r >= parent.rows()) { throw std::invalid_argument("row_select: row index out of range"); }
  }
  return LinearOperator(std::make_shared<RowSelect>(std::move(parent), std::move(rows), std::move(scales)));
}

LinearOperator vstack(std::vector<LinearOperator> parts)
{
  if (parts.empty()) { throw std::invalid_argument("vstack: no operators"); }
  for (auto const &p : parts) {
    if (p.cols() != parts.front().cols()) { throw std::invalid_argument("vstack: column counts differ"); }
  }
  return LinearOperator(std::make_shared<VStack>(std::move(parts)));
}

CMatrix materialize(LinearOperator const &op)
{
  CMatrix m(op.rows(), op.cols());
  CVector e = CVector::Zero(op.cols());
  for (Index j = 0; j < op.cols(); ++j) {
    e(j) = 1.0;
    m.col(j) = op.forward(e);
    e(j) = 0.0;
  }
  return m;
}

NormEstimate operator_norm(LinearOperator const &op, double tol, Index max_iterations)
{
  if (!(tol > 0)) { throw std::invalid_argument("operator_norm: tol must be positive"); }
  Rng rng(0x5eed0fa11ULL);
  CVector v = rng.unit_vector(op.cols());
  NormEstimate est;
  double lambda = 0.0;
  for (Index it = 1; it <= max_iterations; ++it) {
    CVector const w = op.adjoint(op.forward(v));
    double const wn = w.norm();
    est.iterations = it;
    if (wn == 0.0) {
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    lambda = v.dot(w).real();
    double const residual = (w - lambda * v).norm();
    v = w / wn;
    if (residual <= tol * lambda) {
      est.value = std::sqrt(std::max(lambda, 0.0));
      est.converged = true;
      return est;
    }
  }
  est.value = std::sqrt(std::max(lambda, 0.0));
  return est;
}

double spectral_norm(CMatrix const &m)
{
  if (m.size() == 0) { return 0.0; }
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

double hermitian_norm(CMatrix const &m)
{
  if (m.size() == 0) { return 0.0; }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(m, Eigen::EigenvaluesOnly);
  auto const &ev = eig.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

} // namespace bcs
