#include "bcs/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "bcs/random.hpp"

namespace bcs {

SupportSet::SupportSet(std::vector<Index> indices, Index n)
  : indices_(std::move(indices))
  , n_(n)
{
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw std::invalid_argument("SupportSet: duplicate index");
  }
  for (Index i : indices_) {
    if (i < 0 || i >= n_) { throw std::invalid_argument("SupportSet: index out of range"); }
  }
}

std::vector<Index> SupportSet::complement() const
{
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(n_ - size()));
  auto it = indices_.begin();
  for (Index i = 0; i < n_; ++i) {
    if (it != indices_.end() && *it == i) {
      ++it;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

bool SupportSet::contains(Index i) const { return std::binary_search(indices_.begin(), indices_.end(), i); }

namespace {

CMatrix columns(CMatrix const &b, std::vector<Index> const &idx)
{
  CMatrix out(b.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) { out.col(static_cast<Index>(j)) = b.col(idx[j]); }
  return out;
}

// Largest eigenvalue of a Hermitian PSD matrix: dense eigensolve up to 512,
// power iteration beyond.
double largest_eigenvalue(CMatrix const &g)
{
  if (g.rows() == 0) { return 0.0; }
  if (g.rows() <= 512) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(g, Eigen::EigenvaluesOnly);
    return std::max(0.0, eig.eigenvalues()(g.rows() - 1));
  }
  auto apply = [&g](CVector const &v) { return CVector(g * v); };
  // For PSD G the largest singular value is the largest eigenvalue.
  return operator_norm(function_operator(g.rows(), g.cols(), apply, apply, "gram"), 1e-10).value;
}

void check_inputs(BlockDictionary const &dict, DrawingDistribution const &pi, SupportSet const &S, char const *what)
{
  if (dict.is_gaussian()) {
    throw std::invalid_argument(std::string(what) + ": requires a deterministic-finite dictionary");
  }
  if (pi.size() != dict.size()) { throw std::invalid_argument(std::string(what) + ": |Π| must equal the block count"); }
  if (S.n() != dict.n()) { throw std::invalid_argument(std::string(what) + ": support dimension mismatch"); }
  if (S.size() < 1) { throw std::invalid_argument(std::string(what) + ": support must be nonempty"); }
}

double quantile_of(std::vector<double> values, double q)
{
  if (values.empty()) { return 0.0; }
  auto const rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  std::size_t const k = std::clamp<std::size_t>(rank, 1, values.size()) - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

struct Mu1Result
{
  double value = 0.0;
  Index block = -1;
};

Mu1Result mu1_impl(BlockDictionary const &dict, DrawingDistribution const &pi, SupportSet const &S)
{
  Mu1Result r;
  for (Index k = 0; k < dict.size(); ++k) {
    CMatrix const bs = columns(dict.dense_block(k), S.indices());
    double const v = largest_eigenvalue(bs.adjoint() * bs) / pi[k];
    if (v > r.value || r.block < 0) {
      r.value = v;
      r.block = k;
    }
  }
  return r;
}

struct Mu2Result
{
  double value = 0.0;
  Index block = -1;
  Index column = -1;
};

Mu2Result mu2_impl(BlockDictionary const &dict, DrawingDistribution const &pi, SupportSet const &S)
{
  Mu2Result r;
  auto const comp = S.complement();
  double const root_s = std::sqrt(static_cast<double>(S.size()));
  for (Index k = 0; k < dict.size(); ++k) {
    CMatrix const b = dict.dense_block(k);
    CMatrix const cross = columns(b, S.indices()).adjoint() * b;
    for (Index i : comp) {
      double const v = root_s * cross.col(i).norm() / pi[k];
      if (v > r.value || r.block < 0) {
        r.value = v;
        r.block = k;
        r.column = i;
      }
    }
  }
  return r;
}

struct Mu3Result
{
  double value = 0.0;
  Index column = -1;
};

Mu3Result mu3_impl(BlockDictionary const &dict, DrawingDistribution const &pi, SupportSet const &S)
{
  Mu3Result r;
  auto const comp = S.complement();
  Index const s = S.size();
  std::vector<CMatrix> cross;
  cross.reserve(static_cast<std::size_t>(dict.size()));
  for (Index k = 0; k < dict.size(); ++k) {
    CMatrix const b = dict.dense_block(k);
    cross.push_back((columns(b, S.indices()).adjoint() * b) / std::sqrt(pi[k]));
  }
  CMatrix w(s, dict.size());
  for (Index i : comp) {
    for (Index k = 0; k < dict.size(); ++k) { w.col(k) = cross[static_cast<std::size_t>(k)].col(i); }
    double const v = static_cast<double>(s) * largest_eigenvalue(w * w.adjoint());
    if (v > r.value || r.column < 0) {
      r.value = v;
      r.column = i;
    }
  }
  return r;
}

} // namespace

double norm_1_to_inf(CMatrix const &m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double gram_1_to_inf(CMatrix const &b)
{
  // |(B*B)_ij| ≤ √((B*B)_ii (B*B)_jj), so the maximum sits on the diagonal.
  return b.size() == 0 ? 0.0 : b.colwise().squaredNorm().maxCoeff();
}

std::vector<double> block_gram_norms(BlockDictionary const &dict)
{
  if (dict.is_gaussian()) { throw std::invalid_argument("block_gram_norms: requires a deterministic-finite dictionary"); }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(dict.size()));
  for (Index k = 0; k < dict.size(); ++k) { out.push_back(gram_1_to_inf(dict.dense_block(k))); }
  return out;
}

double mu1(BlockDictionary const &dict, DrawingDistribution const &pi, SupportSet const &S)
{
  check_inputs(dict, pi, S, "mu1");
  return mu1_impl(dict, pi, S).value;
}

double mu2(BlockDictionary const &dict, DrawingDistribution const &pi, SupportSet const &S)
{
  check_inputs(dict, pi, S, "mu2");
  if (S.size() == dict.n()) { throw std::invalid_argument("mu2: complement of S is empty"); }
  return mu2_impl(dict, pi, S).value;
}

double mu3(BlockDictionary const &dict, DrawingDistribution const &pi, SupportSet const &S)
{
  if (S.size() == dict.n()) { throw std::invalid_argument("mu3: complement of S is empty"); }
  if (dict.is_gaussian()) {
    if (S.n() != dict.n()) { throw std::invalid_argument("mu3: support dimension mismatch"); }
    return static_cast<double>(S.size()) / static_cast<double>(dict.gaussian_p());
  }
  check_inputs(dict, pi, S, "mu3");
  return mu3_impl(dict, pi, S).value;
}

double mu4(BlockDictionary const &dict, DrawingDistribution const &pi)
{
  if (dict.is_gaussian()) { throw std::invalid_argument("mu4: requires a deterministic-finite dictionary"); }
  if (pi.size() != dict.size()) { throw std::invalid_argument("mu4: |Π| must equal the block count"); }
  auto const norms = block_gram_norms(dict);
  double best = 0.0;
  for (Index k = 0; k < dict.size(); ++k) { best = std::max(best, norms[static_cast<std::size_t>(k)] / pi[k]); }
  return best;
}

CoherenceReport gamma(BlockDictionary const &dict, DrawingDistribution const &pi, SupportSet const &S,
                      MonteCarloOptions const &mc)
{
  CoherenceReport rep;
  rep.s = S.size();
  if (S.size() == dict.n()) { throw std::invalid_argument("gamma: complement of S is empty"); }
  if (!dict.is_gaussian()) {
    check_inputs(dict, pi, S, "gamma");
    auto const r1 = mu1_impl(dict, pi, S);
    auto const r2 = mu2_impl(dict, pi, S);
    auto const r3 = mu3_impl(dict, pi, S);
    rep.mu1 = r1.value;
    rep.mu1_block = r1.block;
    rep.mu2 = r2.value;
    rep.mu2_block = r2.block;
    rep.mu2_column = r2.column;
    rep.mu3 = r3.value;
    rep.mu3_column = r3.column;
    auto const norms = block_gram_norms(dict);
    for (Index k = 0; k < dict.size(); ++k) {
      double const v = norms[static_cast<std::size_t>(k)] / pi[k];
      if (v > rep.mu4 || rep.mu4_block < 0) {
        rep.mu4 = v;
        rep.mu4_block = k;
      }
    }
    rep.mode = CoherenceMode::Exact;
  } else {
    if (S.n() != dict.n()) { throw std::invalid_argument("gamma: support dimension mismatch"); }
    if (mc.trials < 1 || !(mc.quantile > 0.0 && mc.quantile <= 1.0)) {
      throw std::invalid_argument("gamma: invalid Monte-Carlo options");
    }
    auto const comp = S.complement();
    double const root_s = std::sqrt(static_cast<double>(S.size()));
    std::vector<double> s1, s2, s4;
    s1.reserve(static_cast<std::size_t>(mc.trials));
    s2.reserve(static_cast<std::size_t>(mc.trials));
    s4.reserve(static_cast<std::size_t>(mc.trials));
    for (Index t = 0; t < mc.trials; ++t) {
      CMatrix const b = dict.draw_gaussian(mc.seed, static_cast<std::uint64_t>(t));
      CMatrix const bs = columns(b, S.indices());
      s1.push_back(largest_eigenvalue(bs.adjoint() * bs));
      CMatrix const cross = bs.adjoint() * b;
      double worst = 0.0;
      for (Index i : comp) { worst = std::max(worst, cross.col(i).norm()); }
      s2.push_back(root_s * worst);
      s4.push_back(gram_1_to_inf(b));
    }
    rep.mu1 = quantile_of(std::move(s1), mc.quantile);
    rep.mu2 = quantile_of(std::move(s2), mc.quantile);
    rep.mu4 = quantile_of(std::move(s4), mc.quantile);
    rep.mu3 = static_cast<double>(S.size()) / static_cast<double>(dict.gaussian_p());
    rep.mode = CoherenceMode::MonteCarlo;
    rep.trials = mc.trials;
    rep.quantile = mc.quantile;
  }
  rep.gamma = std::max({rep.mu1, rep.mu2, rep.mu3});
  return rep;
}

Mu3Estimate mu3_monte_carlo(BlockDictionary const &dict, SupportSet const &S, Index trials, std::uint64_t seed)
{
  if (!dict.is_gaussian()) { throw std::invalid_argument("mu3_monte_carlo: requires a Gaussian dictionary"); }
  if (trials < 1) { throw std::invalid_argument("mu3_monte_carlo: trials must be >= 1"); }
  auto const comp = S.complement();
  if (comp.empty()) { throw std::invalid_argument("mu3_monte_carlo: complement of S is empty"); }
  Index const s = S.size();
  std::vector<CMatrix> acc(comp.size(), CMatrix::Zero(s, s));
  for (Index t = 0; t < trials; ++t) {
    CMatrix const b = dict.draw_gaussian(seed, static_cast<std::uint64_t>(t));
    CMatrix const cross = columns(b, S.indices()).adjoint() * b;
    for (std::size_t j = 0; j < comp.size(); ++j) {
      auto const c = cross.col(comp[j]);
      acc[j].noalias() += c * c.adjoint();
    }
  }
  Mu3Estimate est;
  est.trials = trials;
  CMatrix pooled = CMatrix::Zero(s, s);
  for (auto &m : acc) {
    m /= static_cast<double>(trials);
    est.per_column_max = std::max(est.per_column_max, static_cast<double>(s) * largest_eigenvalue(m));
    pooled += m;
  }
  pooled /= static_cast<double>(comp.size());
  est.pooled = static_cast<double>(s) * largest_eigenvalue(pooled);
  return est;
}

DrawingDistribution optimal_pi(BlockDictionary const &dict)
{
  auto const norms = block_gram_norms(dict);
  for (double v : norms) {
    if (!(v > 0.0)) { throw std::invalid_argument("optimal_pi: a block has zero Gram; remove it first"); }
  }
  return DrawingDistribution::from_weights(norms);
}

double required_blocks(double gamma, Index n, double eps, double c)
{
  if (!(eps > 0.0 && eps < 1.0)) { throw std::invalid_argument("required_blocks: eps must lie in (0, 1)"); }
  if (gamma < 0.0 || n < 1 || !(c > 0.0)) { throw std::invalid_argument("required_blocks: invalid arguments"); }
  return c * gamma * std::log(4.0 * static_cast<double>(n)) * std::log(12.0 / eps);
}

double required_blocks_proof(double gamma, Index n, Index s, double eps, double c)
{
  if (!(eps > 0.0 && eps < 1.0)) { throw std::invalid_argument("required_blocks_proof: eps must lie in (0, 1)"); }
  if (gamma < 0.0 || n < 1 || s < 1 || !(c > 0.0)) { throw std::invalid_argument("required_blocks_proof: invalid arguments"); }
  double const main = 2.0 * std::log(4.0 * static_cast<double>(n)) * std::log(12.0 / eps);
  double tail = 0.0;
  if (s > 1) {
    double const ls = std::log(static_cast<double>(s));
    tail = ls * std::log(12.0 * std::numbers::e * ls / eps);
  }
  return c * gamma * (main + tail);
}

UpsilonResult upsilon_pdg(LinearOperator const &a0, SupportSet const &S, LinearOperator const &block)
{
  if (a0.cols() != block.cols() || S.n() != block.cols()) {
    throw std::invalid_argument("upsilon_pdg: dimension mismatch");
  }
  CMatrix b = materialize(block);
  for (Index r = 0; r < b.rows(); ++r) {
    double const nrm = b.row(r).norm();
    if (nrm == 0.0) { throw std::invalid_argument("upsilon_pdg: zero row in block"); }
    b.row(r) /= nrm;
  }
  CMatrix const bs = columns(b, S.indices());
  Index const p = bs.rows();
  UpsilonResult res;
  if (p > kUpsilonExactRows) {
    res.value = std::sqrt(static_cast<double>(p)) * spectral_norm(bs);
    res.exact = false;
    return res;
  }
  // ‖M‖₂→₁ = max_σ ‖M*σ‖₂. σ and -σ give the same value, so σ_0 = +1 is
  // fixed and the remaining signs are walked in Gray-code order.
  CMatrix const rows_adj = bs.adjoint(); // s × p, column r = conj(row r)
  CVector v = rows_adj.rowwise().sum();
  std::vector<int> sigma(static_cast<std::size_t>(p), 1);
  double best = v.norm();
  std::uint64_t const patterns = p > 1 ? (std::uint64_t{1} << (p - 1)) : 1;
  for (std::uint64_t g = 1; g < patterns; ++g) {
    // Bit flipped between Gray codes g-1 and g.
    auto const bit = static_cast<Index>(__builtin_ctzll(g)) + 1;
    auto &sg = sigma[static_cast<std::size_t>(bit)];
    v -= 2.0 * static_cast<double>(sg) * rows_adj.col(bit);
    sg = -sg;
    best = std::max(best, v.norm());
  }
  res.value = best;
  res.exact = true;
  return res;
}

} // namespace bcs
