#include "bcs/certificates.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bcs/parallel.hpp"
#include "bcs/random.hpp"

namespace bcs {

namespace {

CMatrix columns(CMatrix const &b, std::vector<Index> const &idx)
{
  CMatrix out(b.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) { out.col(static_cast<Index>(j)) = b.col(idx[j]); }
  return out;
}

CVector restrict_to(CVector const &x, std::vector<Index> const &idx)
{
  CVector out(static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) { out[static_cast<Index>(j)] = x[idx[j]]; }
  return out;
}

} // namespace

DualityConditions duality_conditions(CMatrix const &a, SupportSet const &S)
{
  if (S.n() != a.cols()) { throw std::invalid_argument("duality_conditions: support dimension mismatch"); }
  DualityConditions d;
  CMatrix const as = columns(a, S.indices());
  CMatrix const g = as.adjoint() * as;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(g, Eigen::EigenvaluesOnly);
  double const lmin = g.rows() > 0 ? eig.eigenvalues()(0) : 1.0;
  double const lmax = g.rows() > 0 ? eig.eigenvalues()(g.rows() - 1) : 1.0;
  if (!(lmin > 1e-12 * std::max(lmax, 1.0))) {
    d.singular = true;
    d.inv_norm = std::numeric_limits<double>::infinity();
  } else {
    d.inv_norm = 1.0 / lmin;
  }
  CMatrix const cross = as.adjoint() * a;
  for (Index i : S.complement()) { d.max_col = std::max(d.max_col, cross.col(i).norm()); }
  d.inv_ok = d.inv_norm <= 2.0;
  d.col_ok = d.max_col <= 1.0;
  return d;
}

DualityConditions duality_conditions(SampledOperator const &a, SupportSet const &S)
{
  return duality_conditions(a.dense(), S);
}

GolfingSchedule golfing_schedule(Index s, Index n, Index m, double eps)
{
  if (s < 1 || n < 1) { throw std::invalid_argument("golfing_schedule: s and n must be >= 1"); }
  if (!(eps > 0.0 && eps < 1.0)) { throw std::invalid_argument("golfing_schedule: eps must lie in (0, 1)"); }
  // ⌈log s/(2 log 2)⌉ = ⌈log₄ s⌉, computed in integers to avoid rounding at powers of 4.
  Index extra = 0;
  for (Index p = 1; p < s; p *= 4) { ++extra; }
  GolfingSchedule g;
  g.L = 2 + extra;
  if (m < g.L) { throw std::invalid_argument("golfing_schedule: m must be at least L"); }
  double const log4n = std::log(4.0 * static_cast<double>(n));
  double const w12 = log4n * std::log(2.0 / eps);
  double const wrest = std::log(2.0 * static_cast<double>(g.L) / eps);
  g.sizes.assign(static_cast<std::size_t>(g.L), 0);
  if (g.L == 2) {
    g.sizes[0] = m - m / 2;
    g.sizes[1] = m / 2;
  } else {
    Index const rest_groups = g.L - 2;
    double const total = 2.0 * w12 + static_cast<double>(rest_groups) * wrest;
    auto m12 = static_cast<Index>(std::floor(static_cast<double>(m) * w12 / total));
    m12 = std::clamp<Index>(m12, 1, (m - rest_groups) / 2);
    g.sizes[0] = m12;
    g.sizes[1] = m12;
    Index const rest = m - 2 * m12;
    for (Index l = 0; l < rest_groups; ++l) {
      g.sizes[static_cast<std::size_t>(l + 2)] = rest / rest_groups + (l < rest % rest_groups ? 1 : 0);
    }
  }
  double const root_s = std::sqrt(static_cast<double>(s));
  for (Index l = 0; l < g.L; ++l) {
    bool const first_two = l < 2;
    g.r.push_back(first_two ? 1.0 / (4.0 * std::sqrt(log4n)) : 0.25);
    g.t.push_back(first_two ? 1.0 / (8.0 * root_s) : log4n / (8.0 * root_s));
  }
  return g;
}

CertificateReport golfing_certificate(std::vector<SampledOperator> const &groups, SupportSet const &S, CVector const &e,
                                      GolfingSchedule const *schedule)
{
  if (groups.empty()) { throw std::invalid_argument("golfing_certificate: no groups"); }
  if (e.size() != S.size()) { throw std::invalid_argument("golfing_certificate: e must have one entry per support index"); }
  if (S.n() != groups.front().cols()) { throw std::invalid_argument("golfing_certificate: support dimension mismatch"); }
  if (schedule && static_cast<std::size_t>(schedule->L) != groups.size()) {
    throw std::invalid_argument("golfing_certificate: schedule does not match the group count");
  }
  auto const &idx = S.indices();
  auto const comp = S.complement();
  Index const n = S.n();
  double const m = static_cast<double>(groups.front().m);

  CertificateReport rep;
  rep.v = CVector::Zero(n);
  CVector w = e;
  rep.contraction.push_back(w.norm());
  for (std::size_t l = 0; l < groups.size(); ++l) {
    auto const &g = groups[l];
    if (static_cast<double>(g.m) != m) { throw std::invalid_argument("golfing_certificate: groups must share m"); }
    double const factor = m / static_cast<double>(g.draw_count());
    CMatrix const a = g.dense();
    CMatrix const as = columns(a, idx);
    CVector const step = factor * (a.adjoint() * (as * w));
    CVector const step_s = restrict_to(step, idx);
    double off = 0.0;
    for (Index i : comp) { off = std::max(off, std::abs(step[i])); }
    double const prev = w.norm();
    rep.v += step;
    w -= step_s;
    rep.contraction.push_back(w.norm());
    CMatrix const dev = CMatrix::Identity(S.size(), S.size()) - factor * (as.adjoint() * as);
    rep.group_norms.push_back(hermitian_norm(dev));
    if (schedule) {
      rep.contraction_ok.push_back(w.norm() <= schedule->r[l] * prev);
      rep.off_support_ok.push_back(off <= schedule->t[l] * prev);
    }
  }
  rep.vS_err = (restrict_to(rep.v, idx) - e).norm();
  for (Index i : comp) { rep.vSc_inf = std::max(rep.vSc_inf, std::abs(rep.v[i])); }

  auto const d = duality_conditions(stack_groups(groups).dense(), S);
  rep.inv_norm = d.inv_norm;
  rep.max_col = d.max_col;
  rep.inv_ok = d.inv_ok;
  rep.col_ok = d.col_ok;
  rep.vS_ok = rep.vS_err <= 0.25;
  rep.vSc_ok = rep.vSc_inf <= 0.25;
  return rep;
}

std::int64_t binomial(Index n, Index k)
{
  if (k < 0 || k > n) { return 0; }
  k = std::min(k, n - k);
  constexpr auto cap = std::numeric_limits<std::int64_t>::max();
  __int128 r = 1;
  for (Index i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > cap) { return cap; }
  }
  return static_cast<std::int64_t>(r);
}

namespace {

// Null vector of A_T when rank(A_T) < |T|; empty otherwise.
CVector deficient_direction(CMatrix const &a, std::vector<Index> const &t)
{
  auto const k = static_cast<Index>(t.size());
  if (a.rows() < k) {
    // Fewer rows than columns: a kernel vector always exists.
    CMatrix const at = columns(a, t);
    Eigen::FullPivLU<CMatrix> lu(at);
    CMatrix const ker = lu.kernel();
    return ker.col(0).normalized();
  }
  CMatrix const at = columns(a, t);
  Eigen::JacobiSVD<CMatrix> svd(at, Eigen::ComputeFullV);
  auto const &sv = svd.singularValues();
  double const smax = sv(0);
  if (smax == 0.0 || sv(k - 1) <= 1e-10 * smax) { return svd.matrixV().col(k - 1); }
  return {};
}

bool next_combination(std::vector<Index> &c, Index n)
{
  auto const k = static_cast<Index>(c.size());
  for (Index i = k - 1; i >= 0; --i) {
    auto &ci = c[static_cast<std::size_t>(i)];
    if (ci < n - k + i) {
      ++ci;
      for (Index j = i + 1; j < k; ++j) { c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1; }
      return true;
    }
  }
  return false;
}

void fill_witness(IdentifiabilityResult &res, Index n, Index s, std::vector<Index> const &t, CVector const &hk)
{
  res.identifiable = false;
  res.conclusive = true;
  res.failing_set = t;
  res.h = CVector::Zero(n);
  res.x = CVector::Zero(n);
  res.x_prime = CVector::Zero(n);
  for (std::size_t j = 0; j < t.size(); ++j) {
    Complex const v = hk[static_cast<Index>(j)];
    res.h[t[j]] = v;
    if (static_cast<Index>(j) < s) {
      res.x[t[j]] = v;
    } else {
      res.x_prime[t[j]] = -v;
    }
  }
}

} // namespace

IdentifiabilityResult identifiability_rank_test(CMatrix const &a, Index s, IdentifiabilityMode mode, Index trials,
                                                std::uint64_t seed, Index workers)
{
  Index const n = a.cols();
  if (s < 1 || n < 1) { throw std::invalid_argument("identifiability_rank_test: s and n must be >= 1"); }
  Index const k = std::min(2 * s, n);
  IdentifiabilityResult res;

  if (mode == IdentifiabilityMode::Randomized) {
    if (trials < 1) { throw std::invalid_argument("identifiability_rank_test: randomized mode needs trials >= 1"); }
    Rng rng(seed);
    for (Index i = 0; i < trials; ++i) {
      auto const t = rng.subset(n, k);
      ++res.subsets_checked;
      CVector const h = deficient_direction(a, t);
      if (h.size() > 0) {
        fill_witness(res, n, s, t, h);
        return res;
      }
    }
    res.conclusive = false;
    return res;
  }

  std::int64_t const total = binomial(n, k);
  if (total > kExhaustiveLimit) {
    throw std::invalid_argument("identifiability_rank_test: C(n, 2s) exceeds the exhaustive limit");
  }
  // Worker w tests subsets whose lexicographic rank is ≡ w (mod workers);
  // the smallest failing rank wins, so the witness does not depend on timing.
  workers = std::clamp<Index>(workers, 1, static_cast<Index>(total));
  std::atomic<std::int64_t> first_fail{total};
  std::vector<std::int64_t> checked(static_cast<std::size_t>(workers), 0);
  parallel_for(workers, workers, [&](Index w) {
    std::vector<Index> c(static_cast<std::size_t>(k));
    std::iota(c.begin(), c.end(), Index{0});
    std::int64_t rank = 0;
    do {
      if (rank >= first_fail.load()) { break; }
      if (rank % workers == w) {
        ++checked[static_cast<std::size_t>(w)];
        if (deficient_direction(a, c).size() > 0) {
          std::int64_t cur = first_fail.load();
          while (rank < cur && !first_fail.compare_exchange_weak(cur, rank)) {}
          break;
        }
      }
      ++rank;
    } while (next_combination(c, n));
  });
  res.subsets_checked = std::accumulate(checked.begin(), checked.end(), std::int64_t{0});
  if (first_fail.load() < total) {
    std::vector<Index> c(static_cast<std::size_t>(k));
    std::iota(c.begin(), c.end(), Index{0});
    for (std::int64_t r = 0; r < first_fail.load(); ++r) { next_combination(c, n); }
    fill_witness(res, n, s, c, deficient_direction(a, c));
  }
  return res;
}

IdentifiabilityResult identifiability_rank_test(LinearOperator const &a, Index s, IdentifiabilityMode mode, Index trials,
                                                std::uint64_t seed, Index workers)
{
  return identifiability_rank_test(materialize(a), s, mode, trials, seed, workers);
}

SparseSignal pathological_signal(Index sqrt_n, Index s, std::uint64_t seed)
{
  if (sqrt_n < 1 || s < 1) { throw std::invalid_argument("pathological_signal: sqrt_n and s must be >= 1"); }
  if (s > sqrt_n) { throw std::invalid_argument("pathological_signal: s must not exceed sqrt_n"); }
  Rng rng(seed);
  auto const rows = rng.subset(sqrt_n, s);
  std::vector<Index> support;
  CVector values(s);
  for (Index j = 0; j < s; ++j) {
    support.push_back(rows[static_cast<std::size_t>(j)] * sqrt_n);
    values[j] = rng.unit_phase();
  }
  return SparseSignal(SupportSet(std::move(support), sqrt_n * sqrt_n), values);
}

CVector lift_first_column(CVector const &alpha)
{
  Index const d = alpha.size();
  CVector x = CVector::Zero(d * d);
  for (Index a = 0; a < d; ++a) { x[a * d] = alpha[a]; }
  return x;
}

CMatrix line_reduced_matrix(CMatrix const &psi, SampledOperator const &a)
{
  if (psi.rows() != psi.cols() || psi.rows() * psi.rows() != a.cols()) {
    throw std::invalid_argument("line_reduced_matrix: Ψ does not match the operator");
  }
  if (a.dictionary.is_gaussian()) { throw std::invalid_argument("line_reduced_matrix: requires line blocks"); }
  CMatrix out(a.draw_count(), psi.cols());
  for (Index j = 0; j < a.draw_count(); ++j) {
    Index const k = a.draws[static_cast<std::size_t>(j)];
    if (k >= psi.rows()) { throw std::invalid_argument("line_reduced_matrix: block index exceeds Ψ"); }
    out.row(j) = a.scale(j) * psi.row(k);
  }
  return out;
}

} // namespace bcs
