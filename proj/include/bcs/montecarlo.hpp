#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcs/coherence.hpp"
#include "bcs/sampling.hpp"
#include "bcs/solver.hpp"

namespace bcs {

struct Interval
{
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval at 95% confidence.
Interval wilson_interval(Index successes, Index trials);

enum class TailEvent
{
  E1,
  E2,
  E3,
  E4,
};

std::string to_string(TailEvent e);
TailEvent parse_tail_event(std::string const &name);

struct TailCheckReport
{
  TailEvent event = TailEvent::E1;
  /// δ for E1, t otherwise.
  double threshold = 0.0;
  Index m = 0;
  Index s = 0;
  Index trials = 0;
  Index occurrences = 0;
  double frequency = 0.0;
  Interval wilson;
  double bound = 0.0;
  bool pass = false;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  std::uint64_t seed = 0;
};

struct TailOptions
{
  Index workers = 1;
  /// Used only to estimate μ₁, μ₂ for Gaussian dictionaries.
  MonteCarloOptions gaussian_mc = {};
};

/// Redraws A `trials` times and counts occurrences of the event at every
/// threshold. All thresholds share the same draws. E2/E3 use one unit test
/// vector drawn from the seed. E4 thresholds must lie in (0, μ₁/μ₂).
std::vector<TailCheckReport> tail_check_grid(TailEvent event, BlockDictionary const &dict,
                                             DrawingDistribution const &pi, SupportSet const &S, Index m,
                                             std::vector<double> const &thresholds, Index trials, std::uint64_t seed,
                                             TailOptions const &opts = {});

TailCheckReport tail_check(TailEvent event, BlockDictionary const &dict, DrawingDistribution const &pi,
                           SupportSet const &S, Index m, double threshold, Index trials, std::uint64_t seed,
                           TailOptions const &opts = {});

/// Theoretical tail bound for one event given the coherences.
double tail_bound(TailEvent event, double threshold, Index m, Index s, Index n, double mu1, double mu2, double mu3);

enum class SignalClass
{
  Generic,
  Pathological,
};

enum class BlockSelection
{
  /// i.i.d. draws from Π with replacement.
  Iid,
  /// m distinct blocks chosen uniformly, each scaled by 1/√(m π_k).
  Distinct,
};

std::string to_string(SignalClass c);
std::string to_string(BlockSelection b);

struct PhaseOptions
{
  SignalClass signal = SignalClass::Generic;
  BlockSelection selection = BlockSelection::Iid;
  SolverOptions solver = {};
  Index workers = 1;
};

struct PhaseCell
{
  Index s = 0;
  Index m = 0;
  Index cell = 0;
  Index trials = 0;
  Index successes = 0;
  Index nonconverged = 0;
  double frequency = 0.0;
  Interval wilson;
  double mean_iterations = 0.0;
};

struct PhaseDiagram
{
  std::vector<PhaseCell> cells;
  std::string dictionary;
  std::vector<double> pi;
  std::uint64_t seed = 0;
  SignalClass signal = SignalClass::Generic;
  BlockSelection selection = BlockSelection::Iid;
};

/// One trial of a phase-transition cell: the planted signal, the sensing
/// operator and the solver outcome. Exposed so any cell can be replayed.
struct PhaseTrial
{
  CVector x;
  SampledOperator a;
  RecoveryResult result;
};

PhaseTrial phase_trial(BlockDictionary const &dict, DrawingDistribution const &pi, Index s, Index m,
                       std::uint64_t trial_seed, PhaseOptions const &opts);

/// Seed of trial `trial` in cell `cell`.
std::uint64_t phase_trial_seed(std::uint64_t seed, Index cell, Index trial);

/// Cells are ordered s-major; cell index = i_s·|m_values| + i_m.
PhaseDiagram phase_transition(BlockDictionary const &dict, DrawingDistribution const &pi,
                              std::vector<Index> const &s_values, std::vector<Index> const &m_values, Index trials,
                              std::uint64_t seed, PhaseOptions const &opts = {});

struct GaussianScalingRow
{
  Index s = 0;
  Index p = 0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double gamma = 0.0;
  /// (s/p)·log s.
  double model = 0.0;
};

struct GaussianScalingTable
{
  std::vector<GaussianScalingRow> rows;
  /// Least-squares a in γ ≈ a·(s/p)·log s over rows with s > 1.
  double fit_a = 0.0;
  /// RMS of (γ − a·model)/γ over the fitted rows.
  double fit_residual = 0.0;
  Index n = 0;
  Index trials = 0;
  std::uint64_t seed = 0;
};

GaussianScalingTable gaussian_gamma_scaling(std::vector<Index> const &s_values, std::vector<Index> const &p_values,
                                            Index n, Index trials, std::uint64_t seed, Index workers = 1);

} // namespace bcs
