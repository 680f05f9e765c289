#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcs/serialize.hpp"

namespace bcs {

inline constexpr char const *kVersion = "0.1.0";

/// Invalid configuration; `field` is the dotted path of the offending key.
class ConfigError : public std::runtime_error
{
public:
  ConfigError(std::string field, std::string const &message)
    : std::runtime_error("field '" + field + "': " + message)
    , field_(std::move(field))
  {
  }
  std::string const &field() const { return field_; }

private:
  std::string field_;
};

struct DictionarySpec
{
  /// line | rows_columns | isolated | partition | overlapping | gaussian
  std::string kind;
  /// dft | block_diag | identity (1D parents and the line-block Ψ)
  std::string transform = "dft";
  Index n = 0;
  Index sqrt_n = 0;
  Index block_size = 1;
  Index p = 0;
};

struct DistributionSpec
{
  /// uniform | optimal | explicit
  std::string kind = "uniform";
  std::vector<double> values;
};

struct SignalSpec
{
  /// generic | pathological
  std::string signal_class = "generic";
  std::vector<Index> s_values;
  /// Explicit support for coherence, certify and tailcheck.
  std::vector<Index> support;
};

struct TailSpec
{
  std::vector<std::string> events;
  std::vector<double> thresholds;
};

struct GaussianSpec
{
  std::vector<Index> s_values;
  std::vector<Index> p_values;
  Index n = 0;
  Index trials = 10000;
};

struct IdentifySpec
{
  /// exhaustive | randomized
  std::string mode = "exhaustive";
  Index trials = 1000;
};

struct ExperimentConfig
{
  std::string scenario;
  std::uint64_t seed = 0;
  Index workers = 1;
  DictionarySpec dictionary;
  DistributionSpec distribution;
  SignalSpec signal;
  std::vector<Index> m_values;
  Index trials = 100;
  /// iid | distinct
  std::string selection = "iid";
  SolverOptions solver;
  TailSpec tail;
  GaussianSpec gaussian;
  IdentifySpec identify;
  MonteCarloOptions coherence_mc;
  double eps = 0.1;
  std::string output_dir = ".";
  std::string output_prefix;
};

inline std::vector<std::string> const kScenarios = {"coherence", "optimal-pi", "sample",    "recover",         "phase",
                                                    "certify",   "identify",   "tailcheck", "gaussian-scaling"};

/// Parses and validates a config document. `scenario` overrides the
/// document's scenario field; a conflicting value is an error.
ExperimentConfig parse_config(Json const &doc, std::string const &scenario = {});
ExperimentConfig load_config(std::string const &path, std::string const &scenario = {});

/// Canonical JSON of every field that influences results (output paths excluded).
Json canonical_json(ExperimentConfig const &cfg);
std::uint64_t config_hash(ExperimentConfig const &cfg);

struct Artifact
{
  /// File name suffix, e.g. "phase.csv".
  std::string name;
  std::string content;
};

BlockDictionary build_dictionary(DictionarySpec const &spec);
DrawingDistribution build_distribution(BlockDictionary const &dict, DistributionSpec const &spec);

/// Runs the configured scenario and returns its files without touching disk.
std::vector<Artifact> run_experiment(ExperimentConfig const &cfg);

/// Writes artifacts as <dir>/<prefix><name>; returns the paths written.
std::vector<std::string> write_artifacts(ExperimentConfig const &cfg, std::vector<Artifact> const &artifacts);

struct ReplayResult
{
  bool ok = false;
  std::string message;
};

/// Checks the file's embedded config hash against `cfg` (with the seed taken
/// from the file) and regenerates the data to compare it byte for byte.
ReplayResult replay(ExperimentConfig cfg, std::string const &file_name, std::string const &file_content);

} // namespace bcs
