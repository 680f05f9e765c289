#include "bcs/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include "bcs/random.hpp"

namespace bcs {

struct BlockDictionary::State
{
  DictionaryKind kind = DictionaryKind::DeterministicFinite;
  Index n = 0;
  Index p = 0; // Gaussian only
  Index grid_side = 0;
  std::string label;
  LinearOperator parent;
  std::vector<BlockRows> blocks;
  std::vector<LinearOperator> ops;

  mutable std::once_flag dense_once;
  mutable CMatrix dense;
};

BlockDictionary::BlockDictionary(std::shared_ptr<State> state)
  : state_(std::move(state))
{
}

BlockDictionary::State const &BlockDictionary::state() const
{
  if (!state_) { throw std::logic_error("BlockDictionary: empty dictionary"); }
  return *state_;
}

void BlockDictionary::require_deterministic(char const *what) const
{
  if (state().kind != DictionaryKind::DeterministicFinite) {
    throw std::invalid_argument(std::string(what) + ": requires a deterministic-finite dictionary");
  }
}

BlockDictionary BlockDictionary::from_rows(LinearOperator parent, std::vector<BlockRows> blocks,
                                           std::vector<LinearOperator> ops, std::string label, Index grid_side)
{
  if (blocks.empty()) { throw std::invalid_argument("BlockDictionary: no blocks"); }
  auto st = std::make_shared<State>();
  st->kind = DictionaryKind::DeterministicFinite;
  st->n = parent.cols();
  st->label = std::move(label);
  st->grid_side = grid_side;
  for (auto &b : blocks) {
    if (b.rows.empty()) { throw std::invalid_argument("BlockDictionary: empty block"); }
    if (b.scales.empty()) { b.scales.assign(b.rows.size(), 1.0); }
    if (b.scales.size() != b.rows.size()) { throw std::invalid_argument("BlockDictionary: scales/rows mismatch"); }
    for (Index r : b.rows) {
      if (r < 0 || r >= parent.rows()) { throw std::invalid_argument("BlockDictionary: row index out of range"); }
    }
  }
  if (ops.empty()) {
    ops.reserve(blocks.size());
    for (auto const &b : blocks) { ops.push_back(row_select(parent, b.rows, b.scales)); }
  }
  if (ops.size() != blocks.size()) { throw std::invalid_argument("BlockDictionary: operator count mismatch"); }
  for (std::size_t k = 0; k < ops.size(); ++k) {
    if (ops[k].cols() != st->n || ops[k].rows() != static_cast<Index>(blocks[k].rows.size())) {
      throw std::invalid_argument("BlockDictionary: block operator shape mismatch");
    }
  }
  st->parent = std::move(parent);
  st->blocks = std::move(blocks);
  st->ops = std::move(ops);
  return BlockDictionary(std::move(st));
}

BlockDictionary BlockDictionary::gaussian(Index p, Index n)
{
  if (p < 1 || n < 1) { throw std::invalid_argument("gaussian_dictionary: p and n must be >= 1"); }
  auto st = std::make_shared<State>();
  st->kind = DictionaryKind::Gaussian;
  st->n = n;
  st->p = p;
  st->label = "gaussian(p=" + std::to_string(p) + ", n=" + std::to_string(n) + ")";
  return BlockDictionary(std::move(st));
}

DictionaryKind BlockDictionary::kind() const { return state().kind; }
Index BlockDictionary::n() const { return state().n; }
Index BlockDictionary::size() const { return static_cast<Index>(state().blocks.size()); }
std::string const &BlockDictionary::label() const { return state().label; }
Index BlockDictionary::grid_side() const { return state().grid_side; }

LinearOperator const &BlockDictionary::parent() const
{
  require_deterministic("parent");
  return state().parent;
}

LinearOperator const &BlockDictionary::block(Index k) const
{
  require_deterministic("block");
  if (k < 0 || k >= size()) { throw std::out_of_range("BlockDictionary::block: index out of range"); }
  return state().ops[static_cast<std::size_t>(k)];
}

BlockRows const &BlockDictionary::rows_of(Index k) const
{
  require_deterministic("rows_of");
  if (k < 0 || k >= size()) { throw std::out_of_range("BlockDictionary::rows_of: index out of range"); }
  return state().blocks[static_cast<std::size_t>(k)];
}

Index BlockDictionary::block_rows(Index k) const
{
  if (is_gaussian()) { return state().p; }
  return static_cast<Index>(rows_of(k).rows.size());
}

Index BlockDictionary::total_rows() const
{
  Index total = 0;
  for (auto const &b : state().blocks) { total += static_cast<Index>(b.rows.size()); }
  return total;
}

CMatrix const &BlockDictionary::dense_parent() const
{
  require_deterministic("dense_parent");
  State const &st = state();
  std::call_once(st.dense_once, [&st] { st.dense = materialize(st.parent); });
  return st.dense;
}

CMatrix BlockDictionary::dense_block(Index k) const
{
  BlockRows const &b = rows_of(k);
  CMatrix const &full = dense_parent();
  CMatrix out(static_cast<Index>(b.rows.size()), n());
  for (std::size_t r = 0; r < b.rows.size(); ++r) { out.row(static_cast<Index>(r)) = b.scales[r] * full.row(b.rows[r]); }
  return out;
}

Index BlockDictionary::gaussian_p() const
{
  if (!is_gaussian()) { throw std::invalid_argument("gaussian_p: not a Gaussian dictionary"); }
  return state().p;
}

CMatrix BlockDictionary::draw_gaussian(std::uint64_t seed, std::uint64_t index) const
{
  Index const p = gaussian_p();
  Rng rng(derive_seed(seed, index));
  double const sd = 1.0 / std::sqrt(static_cast<double>(p));
  CMatrix b(p, n());
  for (Index j = 0; j < b.cols(); ++j) {
    for (Index i = 0; i < p; ++i) { b(i, j) = Complex(sd * rng.normal(), 0.0); }
  }
  return b;
}

// ---------------------------------------------------------------------------

DrawingDistribution::DrawingDistribution(std::vector<double> probabilities)
  : pi_(std::move(probabilities))
{
  if (pi_.empty()) { throw std::invalid_argument("DrawingDistribution: empty"); }
  double sum = 0.0;
  for (double v : pi_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("DrawingDistribution: probabilities must be finite and > 0");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) { throw std::invalid_argument("DrawingDistribution: probabilities must sum to 1"); }
  cumulative_.resize(pi_.size());
  std::partial_sum(pi_.begin(), pi_.end(), cumulative_.begin());
  cumulative_.back() = 1.0;
}

DrawingDistribution DrawingDistribution::uniform(Index m)
{
  if (m < 1) { throw std::invalid_argument("DrawingDistribution::uniform: m must be >= 1"); }
  return DrawingDistribution(std::vector<double>(static_cast<std::size_t>(m), 1.0 / static_cast<double>(m)));
}

DrawingDistribution DrawingDistribution::from_weights(std::vector<double> const &weights)
{
  double const sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0)) { throw std::invalid_argument("DrawingDistribution::from_weights: weights sum to zero"); }
  std::vector<double> pi(weights.size());
  std::transform(weights.begin(), weights.end(), pi.begin(), [sum](double w) { return w / sum; });
  // Push the rounding residue into the largest entry so the sum is exact to ~1 ulp.
  double const residue = 1.0 - std::accumulate(pi.begin(), pi.end(), 0.0);
  *std::max_element(pi.begin(), pi.end()) += residue;
  return DrawingDistribution(std::move(pi));
}

Index DrawingDistribution::sample(double u) const
{
  auto const it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  auto const k = static_cast<Index>(it - cumulative_.begin());
  return std::min(k, size() - 1);
}

// ---------------------------------------------------------------------------

namespace {

void check_orthogonal(LinearOperator const &a0, BlockDictionary const &dict, char const *what)
{
  if (a0.rows() != a0.cols()) { throw std::invalid_argument(std::string(what) + ": transform must be square"); }
  // Verified densely on small sizes, trusted above.
  if (a0.cols() <= 256) {
    CMatrix const &m = dict.dense_parent();
    double const dev = hermitian_norm(m.adjoint() * m - CMatrix::Identity(m.cols(), m.cols()));
    if (dev > 1e-8) { throw std::invalid_argument(std::string(what) + ": transform is not orthogonal"); }
  }
}

std::vector<Index> multiplicities(Index n, std::vector<std::vector<Index>> const &index_sets, char const *what)
{
  std::vector<Index> alpha(static_cast<std::size_t>(n), 0);
  for (auto const &set : index_sets) {
    if (set.empty()) { throw std::invalid_argument(std::string(what) + ": empty index set"); }
    std::vector<Index> sorted = set;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument(std::string(what) + ": repeated index within a set");
    }
    for (Index i : set) {
      if (i < 0 || i >= n) { throw std::invalid_argument(std::string(what) + ": index out of range"); }
      ++alpha[static_cast<std::size_t>(i)];
    }
  }
  for (Index a : alpha) {
    if (a == 0) { throw std::invalid_argument(std::string(what) + ": index sets do not cover all rows"); }
  }
  return alpha;
}

} // namespace

std::vector<std::vector<Index>> singleton_sets(Index n)
{
  std::vector<std::vector<Index>> sets(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) { sets[static_cast<std::size_t>(i)] = {i}; }
  return sets;
}

std::vector<std::vector<Index>> consecutive_sets(Index n, Index size)
{
  if (size < 1) { throw std::invalid_argument("consecutive_sets: size must be >= 1"); }
  std::vector<std::vector<Index>> sets;
  for (Index start = 0; start < n; start += size) {
    std::vector<Index> set;
    for (Index i = start; i < std::min(n, start + size); ++i) { set.push_back(i); }
    sets.push_back(std::move(set));
  }
  return sets;
}

BlockDictionary partition_blocks(LinearOperator const &a0, std::vector<std::vector<Index>> const &index_sets)
{
  auto const alpha = multiplicities(a0.rows(), index_sets, "partition_blocks");
  for (Index a : alpha) {
    if (a != 1) { throw std::invalid_argument("partition_blocks: index sets overlap"); }
  }
  std::vector<BlockRows> blocks;
  for (auto const &set : index_sets) { blocks.push_back({set, std::vector<double>(set.size(), 1.0)}); }
  auto dict = BlockDictionary::from_rows(a0, std::move(blocks), {}, "partition(" + a0.describe() + ")");
  check_orthogonal(a0, dict, "partition_blocks");
  return dict;
}

BlockDictionary overlapping_blocks(LinearOperator const &a0, std::vector<std::vector<Index>> const &index_sets)
{
  auto const alpha = multiplicities(a0.rows(), index_sets, "overlapping_blocks");
  std::vector<BlockRows> blocks;
  for (auto const &set : index_sets) {
    BlockRows b;
    b.rows = set;
    for (Index i : set) { b.scales.push_back(1.0 / std::sqrt(static_cast<double>(alpha[static_cast<std::size_t>(i)]))); }
    blocks.push_back(std::move(b));
  }
  auto dict = BlockDictionary::from_rows(a0, std::move(blocks), {}, "overlapping(" + a0.describe() + ")");
  check_orthogonal(a0, dict, "overlapping_blocks");
  return dict;
}

BlockDictionary line_blocks(LinearOperator const &psi)
{
  if (psi.rows() != psi.cols()) { throw std::invalid_argument("line_blocks: Psi must be square"); }
  Index const d = psi.rows();
  CMatrix const psi_dense = materialize(psi);
  if (hermitian_norm(psi_dense.adjoint() * psi_dense - CMatrix::Identity(d, d)) > 1e-8) {
    throw std::invalid_argument("line_blocks: Psi is not orthogonal");
  }
  LinearOperator const parent = kron(psi, psi);
  std::vector<BlockRows> blocks;
  std::vector<LinearOperator> ops;
  for (Index k = 0; k < d; ++k) {
    BlockRows b;
    for (Index j = 0; j < d; ++j) { b.rows.push_back(k * d + j); }
    b.scales.assign(static_cast<std::size_t>(d), 1.0);
    blocks.push_back(std::move(b));
    ops.push_back(kron(dense_operator(psi_dense.row(k)), psi));
  }
  return BlockDictionary::from_rows(parent, std::move(blocks), std::move(ops), "lines(" + psi.describe() + ")", d);
}

BlockDictionary rows_and_columns_blocks(Index sqrt_n)
{
  if (sqrt_n < 2) { throw std::invalid_argument("rows_and_columns_blocks: sqrt_n must be >= 2"); }
  Index const d = sqrt_n;
  std::vector<std::vector<Index>> sets;
  for (Index k = 0; k < d; ++k) {
    std::vector<Index> row;
    for (Index j = 0; j < d; ++j) { row.push_back(k * d + j); }
    sets.push_back(std::move(row));
  }
  for (Index k = 0; k < d; ++k) {
    std::vector<Index> col;
    for (Index j = 0; j < d; ++j) { col.push_back(j * d + k); }
    sets.push_back(std::move(col));
  }
  LinearOperator const parent = kron(dft_operator(d), dft_operator(d));
  auto const alpha = multiplicities(parent.rows(), sets, "rows_and_columns_blocks");
  std::vector<BlockRows> blocks;
  for (auto const &set : sets) {
    BlockRows b;
    b.rows = set;
    for (Index i : set) { b.scales.push_back(1.0 / std::sqrt(static_cast<double>(alpha[static_cast<std::size_t>(i)]))); }
    blocks.push_back(std::move(b));
  }
  return BlockDictionary::from_rows(parent, std::move(blocks), {}, "rows+columns(dft2(" + std::to_string(d) + "))", d);
}

BlockDictionary gaussian_dictionary(Index p, Index n) { return BlockDictionary::gaussian(p, n); }

double verify_isotropy(BlockDictionary const &dict)
{
  if (dict.is_gaussian()) {
    throw std::invalid_argument("verify_isotropy: Gaussian dictionaries are isotropic only in expectation");
  }
  Index const n = dict.n();
  if (n <= 1024) {
    CMatrix sum = CMatrix::Zero(n, n);
    for (Index k = 0; k < dict.size(); ++k) {
      CMatrix const b = dict.dense_block(k);
      sum.noalias() += b.adjoint() * b;
    }
    sum -= CMatrix::Identity(n, n);
    return hermitian_norm(sum);
  }
  auto residual = [dict](CVector const &v) {
    CVector out = -v;
    for (Index k = 0; k < dict.size(); ++k) { out += dict.block(k).adjoint(dict.block(k).forward(v)); }
    return out;
  };
  return operator_norm(function_operator(n, n, residual, residual, "isotropy-residual"), 1e-10).value;
}

} // namespace bcs
