#include "bcs/montecarlo.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bcs/certificates.hpp"
#include "bcs/parallel.hpp"
#include "bcs/random.hpp"

namespace bcs {

namespace {

constexpr double kWilsonZ = 1.959963984540054;

CMatrix columns(CMatrix const &b, std::vector<Index> const &idx)
{
  CMatrix out(b.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) { out.col(static_cast<Index>(j)) = b.col(idx[j]); }
  return out;
}

} // namespace

Interval wilson_interval(Index successes, Index trials)
{
  if (trials < 1 || successes < 0 || successes > trials) { throw std::invalid_argument("wilson_interval: bad counts"); }
  double const n = static_cast<double>(trials);
  double const p = static_cast<double>(successes) / n;
  double const z2 = kWilsonZ * kWilsonZ;
  double const denom = 1.0 + z2 / n;
  double const centre = (p + z2 / (2.0 * n)) / denom;
  double const half = kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::string to_string(TailEvent e)
{
  switch (e) {
  case TailEvent::E1: return "E1";
  case TailEvent::E2: return "E2";
  case TailEvent::E3: return "E3";
  case TailEvent::E4: return "E4";
  }
  return "?";
}

TailEvent parse_tail_event(std::string const &name)
{
  if (name == "E1") { return TailEvent::E1; }
  if (name == "E2") { return TailEvent::E2; }
  if (name == "E3") { return TailEvent::E3; }
  if (name == "E4") { return TailEvent::E4; }
  throw std::invalid_argument("unknown tail event '" + name + "'");
}

std::string to_string(SignalClass c) { return c == SignalClass::Generic ? "generic" : "pathological"; }
std::string to_string(BlockSelection b) { return b == BlockSelection::Iid ? "iid" : "distinct"; }

double tail_bound(TailEvent event, double threshold, Index m, Index s, Index n, double mu1, double mu2, double mu3)
{
  double const md = static_cast<double>(m);
  double const sd = static_cast<double>(s);
  double const t = threshold;
  switch (event) {
  case TailEvent::E1:
    return 2.0 * sd * std::exp(-(md * t * t / 2.0) / (mu1 + std::max(mu1 - 1.0, 1.0) * t / 3.0));
  case TailEvent::E2: {
    double const excess = std::max(mu1 - 1.0, 0.0);
    return std::exp(-(md * t * t / 2.0) / (excess + 2.0 * std::sqrt(excess / md) * mu1 + mu1 * t / 3.0));
  }
  case TailEvent::E3:
    return 4.0 * static_cast<double>(n) * std::exp(-(md * t * t / 4.0) / (mu3 / sd + mu2 / std::sqrt(sd) * t / 3.0));
  case TailEvent::E4: {
    double const a = std::sqrt(md / mu1) * t - 1.0;
    return static_cast<double>(n) * std::exp(-a * a / 4.0);
  }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<TailCheckReport> tail_check_grid(TailEvent event, BlockDictionary const &dict,
                                             DrawingDistribution const &pi, SupportSet const &S, Index m,
                                             std::vector<double> const &thresholds, Index trials, std::uint64_t seed,
                                             TailOptions const &opts)
{
  if (trials < 1 || m < 1) { throw std::invalid_argument("tail_check: trials and m must be >= 1"); }
  if (thresholds.empty()) { throw std::invalid_argument("tail_check: no thresholds"); }
  for (double t : thresholds) {
    if (!(t > 0.0)) { throw std::invalid_argument("tail_check: thresholds must be positive"); }
  }
  auto const rep = gamma(dict, pi, S, opts.gaussian_mc);
  if (event == TailEvent::E4) {
    for (double t : thresholds) {
      if (!(t < rep.mu1 / rep.mu2)) { throw std::invalid_argument("tail_check: E4 requires 0 < t < mu1/mu2"); }
    }
  }
  auto const &idx = S.indices();
  auto const comp = S.complement();
  Index const s = S.size();
  bool const need_cross = event == TailEvent::E3 || event == TailEvent::E4;

  // Per-block G_k = B_{k,S}*B_{k,S} and C_k = B_{k,S}*B_k.
  std::vector<CMatrix> gram, cross;
  if (!dict.is_gaussian()) {
    for (Index k = 0; k < dict.size(); ++k) {
      CMatrix const b = dict.dense_block(k);
      CMatrix const bs = columns(b, idx);
      gram.push_back(bs.adjoint() * bs);
      if (need_cross) { cross.push_back(bs.adjoint() * b); }
    }
  }

  Rng vec_rng(derive_seed(seed, 0xfeedULL));
  CVector const w = vec_rng.unit_vector(s);

  std::vector<double> stat(static_cast<std::size_t>(trials));
  parallel_for(trials, opts.workers, [&](Index trial) {
    auto const a = draw_blocks(dict, pi, m, derive_seed(seed, 1, trial));
    CMatrix g = CMatrix::Zero(s, s);
    CMatrix c;
    if (need_cross) { c = CMatrix::Zero(s, S.n()); }
    for (Index j = 0; j < a.draw_count(); ++j) {
      double const sc2 = a.scale(j) * a.scale(j);
      if (dict.is_gaussian()) {
        CMatrix const &b = a.gaussian_blocks[static_cast<std::size_t>(j)];
        CMatrix const bs = columns(b, idx);
        g.noalias() += sc2 * (bs.adjoint() * bs);
        if (need_cross) { c.noalias() += sc2 * (bs.adjoint() * b); }
      } else {
        auto const k = static_cast<std::size_t>(a.draws[static_cast<std::size_t>(j)]);
        g += sc2 * gram[k];
        if (need_cross) { c += sc2 * cross[k]; }
      }
    }
    double value = 0.0;
    switch (event) {
    case TailEvent::E1: value = hermitian_norm(g - CMatrix::Identity(s, s)); break;
    case TailEvent::E2: value = ((g - CMatrix::Identity(s, s)) * w).norm(); break;
    case TailEvent::E3: {
      CVector const off = c.adjoint() * w;
      for (Index i : comp) { value = std::max(value, std::abs(off[i])); }
      break;
    }
    case TailEvent::E4:
      for (Index i : comp) { value = std::max(value, c.col(i).norm()); }
      break;
    }
    stat[static_cast<std::size_t>(trial)] = value;
  });

  std::vector<TailCheckReport> out;
  for (double t : thresholds) {
    TailCheckReport r;
    r.event = event;
    r.threshold = t;
    r.m = m;
    r.s = s;
    r.trials = trials;
    r.seed = seed;
    r.mu1 = rep.mu1;
    r.mu2 = rep.mu2;
    r.mu3 = rep.mu3;
    double level = t;
    if (event == TailEvent::E2) { level = std::sqrt(std::max(rep.mu1 - 1.0, 0.0) / static_cast<double>(m)) + t; }
    for (double v : stat) {
      if (v >= level) { ++r.occurrences; }
    }
    r.frequency = static_cast<double>(r.occurrences) / static_cast<double>(trials);
    r.wilson = wilson_interval(r.occurrences, trials);
    r.bound = tail_bound(event, t, m, s, S.n(), rep.mu1, rep.mu2, rep.mu3);
    r.pass = r.wilson.lo <= r.bound;
    out.push_back(r);
  }
  return out;
}

TailCheckReport tail_check(TailEvent event, BlockDictionary const &dict, DrawingDistribution const &pi,
                           SupportSet const &S, Index m, double threshold, Index trials, std::uint64_t seed,
                           TailOptions const &opts)
{
  return tail_check_grid(event, dict, pi, S, m, {threshold}, trials, seed, opts).front();
}

std::uint64_t phase_trial_seed(std::uint64_t seed, Index cell, Index trial) { return derive_seed(seed, cell, trial); }

PhaseTrial phase_trial(BlockDictionary const &dict, DrawingDistribution const &pi, Index s, Index m,
                       std::uint64_t trial_seed, PhaseOptions const &opts)
{
  Index const n = dict.n();
  CVector x;
  if (opts.signal == SignalClass::Pathological) {
    Index const side = dict.grid_side();
    if (side == 0) { throw std::invalid_argument("phase_transition: pathological signals need a grid dictionary"); }
    x = pathological_signal(side, s, derive_seed(trial_seed, 1)).dense();
  } else {
    Rng rng(derive_seed(trial_seed, 1));
    x = CVector::Zero(n);
    for (Index i : rng.subset(n, s)) { x[i] = rng.unit_phase(); }
  }
  std::uint64_t const draw_seed = derive_seed(trial_seed, 2);
  SampledOperator a = [&] {
    if (opts.selection == BlockSelection::Distinct && !dict.is_gaussian()) {
      Rng rng(draw_seed);
      return sampled_from_indices(dict, pi, rng.subset(dict.size(), m));
    }
    return draw_blocks(dict, pi, m, draw_seed);
  }();
  CMatrix const dense = a.dense();
  CVector const y = dense * x;
  RecoveryResult result = basis_pursuit(dense, y, opts.solver, &x);
  return {std::move(x), std::move(a), std::move(result)};
}

PhaseDiagram phase_transition(BlockDictionary const &dict, DrawingDistribution const &pi,
                              std::vector<Index> const &s_values, std::vector<Index> const &m_values, Index trials,
                              std::uint64_t seed, PhaseOptions const &opts)
{
  if (trials < 1) { throw std::invalid_argument("phase_transition: trials must be >= 1"); }
  if (s_values.empty() || m_values.empty()) { throw std::invalid_argument("phase_transition: empty s or m grid"); }
  Index const side = dict.grid_side();
  for (Index s : s_values) {
    if (s < 1 || s > dict.n()) { throw std::invalid_argument("phase_transition: s out of range"); }
    if (opts.signal == SignalClass::Pathological && (side == 0 || s > side)) {
      throw std::invalid_argument("phase_transition: pathological signals need s <= grid side");
    }
  }
  for (Index m : m_values) {
    if (m < 1) { throw std::invalid_argument("phase_transition: m must be >= 1"); }
    if (opts.selection == BlockSelection::Distinct && !dict.is_gaussian() && m > dict.size()) {
      throw std::invalid_argument("phase_transition: distinct selection needs m <= block count");
    }
  }
  auto const n_m = static_cast<Index>(m_values.size());
  Index const cells = static_cast<Index>(s_values.size()) * n_m;

  struct Outcome
  {
    bool success = false;
    bool converged = false;
    Index iterations = 0;
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(cells * trials));
  parallel_for(cells * trials, opts.workers, [&](Index job) {
    Index const cell = job / trials;
    Index const trial = job % trials;
    Index const s = s_values[static_cast<std::size_t>(cell / n_m)];
    Index const m = m_values[static_cast<std::size_t>(cell % n_m)];
    auto const t = phase_trial(dict, pi, s, m, phase_trial_seed(seed, cell, trial), opts);
    outcomes[static_cast<std::size_t>(job)] = {t.result.success && t.result.converged, t.result.converged,
                                               t.result.iterations};
  });

  PhaseDiagram d;
  d.dictionary = dict.label();
  if (!dict.is_gaussian()) { d.pi = pi.values(); }
  d.seed = seed;
  d.signal = opts.signal;
  d.selection = opts.selection;
  for (Index cell = 0; cell < cells; ++cell) {
    PhaseCell c;
    c.cell = cell;
    c.s = s_values[static_cast<std::size_t>(cell / n_m)];
    c.m = m_values[static_cast<std::size_t>(cell % n_m)];
    c.trials = trials;
    double iters = 0.0;
    for (Index trial = 0; trial < trials; ++trial) {
      auto const &o = outcomes[static_cast<std::size_t>(cell * trials + trial)];
      if (o.success) { ++c.successes; }
      if (!o.converged) { ++c.nonconverged; }
      iters += static_cast<double>(o.iterations);
    }
    c.frequency = static_cast<double>(c.successes) / static_cast<double>(trials);
    c.wilson = wilson_interval(c.successes, trials);
    c.mean_iterations = iters / static_cast<double>(trials);
    d.cells.push_back(c);
  }
  return d;
}

GaussianScalingTable gaussian_gamma_scaling(std::vector<Index> const &s_values, std::vector<Index> const &p_values,
                                            Index n, Index trials, std::uint64_t seed, Index workers)
{
  if (s_values.empty() || p_values.empty()) { throw std::invalid_argument("gaussian_gamma_scaling: empty grid"); }
  for (Index s : s_values) {
    if (s < 1 || s >= n) { throw std::invalid_argument("gaussian_gamma_scaling: need 1 <= s < n"); }
  }
  for (Index p : p_values) {
    if (p < 1) { throw std::invalid_argument("gaussian_gamma_scaling: p must be >= 1"); }
  }
  GaussianScalingTable table;
  table.n = n;
  table.trials = trials;
  table.seed = seed;
  auto const n_p = static_cast<Index>(p_values.size());
  Index const count = static_cast<Index>(s_values.size()) * n_p;
  table.rows.resize(static_cast<std::size_t>(count));
  parallel_for(count, workers, [&](Index job) {
    Index const s = s_values[static_cast<std::size_t>(job / n_p)];
    Index const p = p_values[static_cast<std::size_t>(job % n_p)];
    auto const dict = gaussian_dictionary(p, n);
    std::vector<Index> support(static_cast<std::size_t>(s));
    for (Index i = 0; i < s; ++i) { support[static_cast<std::size_t>(i)] = i; }
    MonteCarloOptions mc;
    mc.trials = trials;
    mc.seed = derive_seed(seed, s, p);
    auto const rep = gamma(dict, DrawingDistribution::uniform(1), SupportSet(support, n), mc);
    GaussianScalingRow r;
    r.s = s;
    r.p = p;
    r.mu1 = rep.mu1;
    r.mu2 = rep.mu2;
    r.mu3 = rep.mu3;
    r.gamma = rep.gamma;
    r.model = static_cast<double>(s) / static_cast<double>(p) * std::log(static_cast<double>(s));
    table.rows[static_cast<std::size_t>(job)] = r;
  });
  double num = 0.0, den = 0.0;
  for (auto const &r : table.rows) {
    if (r.s > 1) {
      num += r.gamma * r.model;
      den += r.model * r.model;
    }
  }
  if (den > 0.0) {
    table.fit_a = num / den;
    double sq = 0.0;
    Index used = 0;
    for (auto const &r : table.rows) {
      if (r.s > 1) {
        double const rel = (r.gamma - table.fit_a * r.model) / r.gamma;
        sq += rel * rel;
        ++used;
      }
    }
    table.fit_residual = std::sqrt(sq / static_cast<double>(used));
  }
  return table;
}

} // namespace bcs
