#include "bcs/sampling.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "bcs/random.hpp"

namespace bcs {

double SampledOperator::scale(Index j) const
{
  return 1.0 / std::sqrt(static_cast<double>(m) * draw_pi[static_cast<std::size_t>(j)]);
}

CMatrix SampledOperator::dense_draw(Index j) const
{
  if (dictionary.is_gaussian()) { return gaussian_blocks[static_cast<std::size_t>(j)]; }
  return dictionary.dense_block(draws[static_cast<std::size_t>(j)]);
}

CMatrix SampledOperator::dense() const
{
  CMatrix out(rows(), cols());
  for (Index j = 0; j < draw_count(); ++j) {
    auto const o = offsets[static_cast<std::size_t>(j)];
    CMatrix const b = dense_draw(j);
    out.middleRows(o, b.rows()) = scale(j) * b;
  }
  return out;
}

namespace {

// One parent application per call, then a gather of the drawn rows (scatter
// for the adjoint). Applying every drawn block separately would repeat the
// parent transform once per draw.
LinearOperator gathered_operator(LinearOperator const &parent, std::vector<Index> rows, std::vector<double> scales)
{
  auto const r = std::make_shared<std::vector<Index> const>(std::move(rows));
  auto const w = std::make_shared<std::vector<double> const>(std::move(scales));
  Index const q = static_cast<Index>(r->size());
  Index const parent_rows = parent.rows();
  auto forward = [parent, r, w, q](CVector const &x) {
    CVector const full = parent.forward(x);
    CVector y(q);
    for (Index i = 0; i < q; ++i) { y[i] = (*w)[static_cast<std::size_t>(i)] * full[(*r)[static_cast<std::size_t>(i)]]; }
    return y;
  };
  auto adjoint = [parent, r, w, q, parent_rows](CVector const &y) {
    CVector full = CVector::Zero(parent_rows);
    for (Index i = 0; i < q; ++i) { full[(*r)[static_cast<std::size_t>(i)]] += (*w)[static_cast<std::size_t>(i)] * y[i]; }
    return parent.adjoint(full);
  };
  return function_operator(q, parent.cols(), forward, adjoint, "sampled(" + parent.describe() + ")");
}

SampledOperator assemble(BlockDictionary const &dict, std::vector<Index> draws, std::vector<double> draw_pi,
                         std::vector<CMatrix> gaussian, Index m, std::uint64_t seed)
{
  SampledOperator a{dict, std::move(draws), std::move(draw_pi), std::move(gaussian), seed, m, {}, {}};
  std::vector<LinearOperator> parts;
  std::vector<Index> rows;
  std::vector<double> scales;
  a.offsets.reserve(a.draws.size() + 1);
  Index row = 0;
  for (Index j = 0; j < a.draw_count(); ++j) {
    a.offsets.push_back(row);
    if (dict.is_gaussian()) {
      auto const &b = a.gaussian_blocks[static_cast<std::size_t>(j)];
      parts.push_back(dense_operator(a.scale(j) * b));
      row += b.rows();
    } else {
      auto const &b = dict.rows_of(a.draws[static_cast<std::size_t>(j)]);
      for (std::size_t i = 0; i < b.rows.size(); ++i) {
        rows.push_back(b.rows[i]);
        scales.push_back(a.scale(j) * b.scales[i]);
      }
      row += static_cast<Index>(b.rows.size());
    }
  }
  a.offsets.push_back(row);
  a.op = dict.is_gaussian() ? vstack(std::move(parts)) : gathered_operator(dict.parent(), std::move(rows), std::move(scales));
  return a;
}

void check_pi(BlockDictionary const &dict, DrawingDistribution const &pi)
{
  if (!dict.is_gaussian() && pi.size() != dict.size()) {
    throw std::invalid_argument("draw_blocks: |Π| must equal the block count");
  }
}

} // namespace

SampledOperator draw_blocks(BlockDictionary const &dict, DrawingDistribution const &pi, Index m, std::uint64_t seed)
{
  if (m < 1) { throw std::invalid_argument("draw_blocks: m must be >= 1"); }
  check_pi(dict, pi);
  std::vector<Index> draws(static_cast<std::size_t>(m));
  std::vector<double> draw_pi(static_cast<std::size_t>(m), 1.0);
  std::vector<CMatrix> gaussian;
  if (dict.is_gaussian()) {
    gaussian.reserve(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) {
      draws[static_cast<std::size_t>(j)] = j;
      gaussian.push_back(dict.draw_gaussian(seed, static_cast<std::uint64_t>(j)));
    }
  } else {
    for (Index j = 0; j < m; ++j) {
      Rng rng(derive_seed(seed, j));
      Index const k = pi.sample(rng.uniform());
      draws[static_cast<std::size_t>(j)] = k;
      draw_pi[static_cast<std::size_t>(j)] = pi[k];
    }
  }
  return assemble(dict, std::move(draws), std::move(draw_pi), std::move(gaussian), m, seed);
}

SampledOperator sampled_from_indices(BlockDictionary const &dict, DrawingDistribution const &pi,
                                     std::vector<Index> draws, Index m)
{
  if (dict.is_gaussian()) { throw std::invalid_argument("sampled_from_indices: requires a deterministic-finite dictionary"); }
  if (draws.empty()) { throw std::invalid_argument("sampled_from_indices: no draws"); }
  check_pi(dict, pi);
  if (m == 0) { m = static_cast<Index>(draws.size()); }
  if (m < 1) { throw std::invalid_argument("sampled_from_indices: m must be >= 1"); }
  std::vector<double> draw_pi;
  draw_pi.reserve(draws.size());
  for (Index k : draws) {
    if (k < 0 || k >= dict.size()) { throw std::invalid_argument("sampled_from_indices: block index out of range"); }
    draw_pi.push_back(pi[k]);
  }
  return assemble(dict, std::move(draws), std::move(draw_pi), {}, m, 0);
}

SampledOperator isolated_sampler(LinearOperator const &a0, DrawingDistribution const &p, Index m, std::uint64_t seed)
{
  if (p.size() != a0.rows()) { throw std::invalid_argument("isolated_sampler: P must cover every row of A0"); }
  return draw_blocks(partition_blocks(a0, singleton_sets(a0.rows())), p, m, seed);
}

std::vector<SampledOperator> partition_for_golfing(SampledOperator const &a, std::vector<Index> const &group_sizes)
{
  Index total = 0;
  for (Index g : group_sizes) {
    if (g < 1) { throw std::invalid_argument("partition_for_golfing: empty group"); }
    total += g;
  }
  if (total != a.draw_count()) { throw std::invalid_argument("partition_for_golfing: group sizes must sum to m"); }
  if (group_sizes.size() == 1) { return {a}; }
  std::vector<SampledOperator> out;
  Index start = 0;
  for (Index g : group_sizes) {
    auto const b = static_cast<std::ptrdiff_t>(start);
    auto const e = static_cast<std::ptrdiff_t>(start + g);
    std::vector<Index> draws(a.draws.begin() + b, a.draws.begin() + e);
    std::vector<double> draw_pi(a.draw_pi.begin() + b, a.draw_pi.begin() + e);
    std::vector<CMatrix> gaussian;
    if (a.dictionary.is_gaussian()) { gaussian.assign(a.gaussian_blocks.begin() + b, a.gaussian_blocks.begin() + e); }
    out.push_back(assemble(a.dictionary, std::move(draws), std::move(draw_pi), std::move(gaussian), a.m, a.seed));
    start += g;
  }
  return out;
}

SampledOperator stack_groups(std::vector<SampledOperator> const &groups)
{
  if (groups.empty()) { throw std::invalid_argument("stack_groups: no groups"); }
  std::vector<Index> draws;
  std::vector<double> draw_pi;
  std::vector<CMatrix> gaussian;
  for (auto const &g : groups) {
    if (g.m != groups.front().m || g.cols() != groups.front().cols()) {
      throw std::invalid_argument("stack_groups: groups do not share a parent");
    }
    draws.insert(draws.end(), g.draws.begin(), g.draws.end());
    draw_pi.insert(draw_pi.end(), g.draw_pi.begin(), g.draw_pi.end());
    gaussian.insert(gaussian.end(), g.gaussian_blocks.begin(), g.gaussian_blocks.end());
  }
  auto const &f = groups.front();
  return assemble(f.dictionary, std::move(draws), std::move(draw_pi), std::move(gaussian), f.m, f.seed);
}

std::string sampling_mask_pgm(SampledOperator const &a)
{
  Index const side = a.dictionary.grid_side();
  if (a.dictionary.is_gaussian() || side == 0) {
    throw std::invalid_argument("sampling_mask_pgm: dictionary has no k-space grid");
  }
  std::vector<int> mask(static_cast<std::size_t>(side * side), 0);
  for (Index k : a.draws) {
    for (Index r : a.dictionary.rows_of(k).rows) { mask[static_cast<std::size_t>(r)] = 255; }
  }
  std::ostringstream os;
  os << "P2\n" << side << ' ' << side << "\n255\n";
  for (Index r = 0; r < side; ++r) {
    for (Index c = 0; c < side; ++c) {
      os << mask[static_cast<std::size_t>(r * side + c)] << (c + 1 < side ? ' ' : '\n');
    }
  }
  return os.str();
}

} // namespace bcs
