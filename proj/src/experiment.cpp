#include "bcs/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "bcs/parallel.hpp"
#include "bcs/random.hpp"

namespace bcs {

namespace {

// ---- config parsing ------------------------------------------------------

class Section
{
public:
  Section(Json const &j, std::string path, std::set<std::string> allowed)
    : j_(j)
    , path_(std::move(path))
  {
    if (!j_.is_object()) { throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object"); }
    for (auto const &[key, value] : j_.items()) {
      (void)value;
      if (!allowed.count(key)) { throw ConfigError(field(key), "unknown field"); }
    }
  }

  std::string field(std::string const &key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(std::string const &key) const { return j_.contains(key); }
  Json const &raw(std::string const &key) const { return j_.at(key); }

  std::string str(std::string const &key, std::string fallback) const
  {
    if (!has(key)) { return fallback; }
    if (!j_.at(key).is_string()) { throw ConfigError(field(key), "must be a string"); }
    return j_.at(key).get<std::string>();
  }

  std::int64_t integer(std::string const &key, std::int64_t fallback) const
  {
    if (!has(key)) { return fallback; }
    auto const &v = j_.at(key);
    if (!v.is_number_integer()) { throw ConfigError(field(key), "must be an integer"); }
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(std::string const &key, std::uint64_t fallback) const
  {
    if (!has(key)) { return fallback; }
    auto const &v = j_.at(key);
    if (v.is_number_unsigned()) { return v.get<std::uint64_t>(); }
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) { return static_cast<std::uint64_t>(v.get<std::int64_t>()); }
    throw ConfigError(field(key), "must be a non-negative integer");
  }

  double number(std::string const &key, double fallback) const
  {
    if (!has(key)) { return fallback; }
    auto const &v = j_.at(key);
    if (!v.is_number()) { throw ConfigError(field(key), "must be a number"); }
    return v.get<double>();
  }

  std::vector<Index> int_list(std::string const &key) const
  {
    if (!has(key)) { return {}; }
    auto const &v = j_.at(key);
    if (v.is_number_integer()) { return {v.get<Index>()}; }
    if (!v.is_array()) { throw ConfigError(field(key), "must be an integer or a list of integers"); }
    std::vector<Index> out;
    for (auto const &e : v) {
      if (!e.is_number_integer()) { throw ConfigError(field(key), "entries must be integers"); }
      out.push_back(e.get<Index>());
    }
    return out;
  }

  std::vector<double> number_list(std::string const &key) const
  {
    if (!has(key)) { return {}; }
    auto const &v = j_.at(key);
    if (v.is_number()) { return {v.get<double>()}; }
    if (!v.is_array()) { throw ConfigError(field(key), "must be a number or a list of numbers"); }
    std::vector<double> out;
    for (auto const &e : v) {
      if (!e.is_number()) { throw ConfigError(field(key), "entries must be numbers"); }
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::string> string_list(std::string const &key) const
  {
    if (!has(key)) { return {}; }
    auto const &v = j_.at(key);
    if (v.is_string()) { return {v.get<std::string>()}; }
    if (!v.is_array()) { throw ConfigError(field(key), "must be a string or a list of strings"); }
    std::vector<std::string> out;
    for (auto const &e : v) {
      if (!e.is_string()) { throw ConfigError(field(key), "entries must be strings"); }
      out.push_back(e.get<std::string>());
    }
    return out;
  }

private:
  Json const &j_;
  std::string path_;
};

void require(bool ok, std::string const &field, std::string const &message)
{
  if (!ok) { throw ConfigError(field, message); }
}

void require_one_of(std::string const &value, std::vector<std::string> const &options, std::string const &field)
{
  if (std::find(options.begin(), options.end(), value) == options.end()) {
    std::string list;
    for (auto const &o : options) { list += (list.empty() ? "" : ", ") + o; }
    throw ConfigError(field, "'" + value + "' is not one of {" + list + "}");
  }
}

void require_positive(std::vector<Index> const &v, std::string const &field)
{
  for (Index x : v) { require(x >= 1, field, "entries must be >= 1"); }
}

bool needs(std::string const &scenario, std::initializer_list<char const *> list)
{
  return std::any_of(list.begin(), list.end(), [&](char const *s) { return scenario == s; });
}

} // namespace

ExperimentConfig parse_config(Json const &doc, std::string const &scenario)
{
  Section root(doc, "",
               {"scenario", "seed", "workers", "dictionary", "distribution", "signal", "m_values", "trials",
                "selection", "solver", "tail", "gaussian", "identify", "coherence_mc", "eps", "output"});
  ExperimentConfig cfg;
  cfg.scenario = root.str("scenario", "");
  if (!scenario.empty()) {
    require(cfg.scenario.empty() || cfg.scenario == scenario, "scenario",
            "config is for '" + cfg.scenario + "', not '" + scenario + "'");
    cfg.scenario = scenario;
  }
  require(!cfg.scenario.empty(), "scenario", "missing");
  require_one_of(cfg.scenario, kScenarios, "scenario");
  cfg.seed = root.unsigned_integer("seed", 0);
  cfg.workers = root.integer("workers", 1);
  require(cfg.workers >= 1, "workers", "must be >= 1");
  cfg.trials = root.integer("trials", 100);
  require(cfg.trials >= 1, "trials", "must be >= 1");
  cfg.eps = root.number("eps", 0.1);
  require(cfg.eps > 0.0 && cfg.eps < 1.0, "eps", "must lie in (0, 1)");
  cfg.selection = root.str("selection", cfg.scenario == "identify" ? "distinct" : "iid");
  require_one_of(cfg.selection, {"iid", "distinct"}, "selection");

  bool const gaussian_only = cfg.scenario == "gaussian-scaling";
  if (!gaussian_only) {
    require(root.has("dictionary"), "dictionary", "missing");
    Section d(root.raw("dictionary"), "dictionary", {"kind", "transform", "n", "sqrt_n", "block_size", "p"});
    auto &ds = cfg.dictionary;
    ds.kind = d.str("kind", "");
    require_one_of(ds.kind, {"line", "rows_columns", "isolated", "partition", "overlapping", "gaussian"},
                   "dictionary.kind");
    ds.transform = d.str("transform", "dft");
    require_one_of(ds.transform, {"dft", "block_diag", "identity"}, "dictionary.transform");
    ds.n = d.integer("n", 0);
    ds.sqrt_n = d.integer("sqrt_n", 0);
    ds.block_size = d.integer("block_size", 1);
    ds.p = d.integer("p", 0);
    if (ds.kind == "line" || ds.kind == "rows_columns") {
      require(ds.sqrt_n >= 2, "dictionary.sqrt_n", "must be >= 2");
      require(ds.n == 0 || ds.n == ds.sqrt_n * ds.sqrt_n, "dictionary.n", "must equal sqrt_n^2");
      ds.n = ds.sqrt_n * ds.sqrt_n;
      require(ds.kind == "line" || ds.transform == "dft", "dictionary.transform", "rows_columns uses the 2D DFT");
    } else {
      require(ds.n >= 2, "dictionary.n", "must be >= 2");
    }
    if (ds.kind == "partition" || ds.kind == "overlapping") {
      require(ds.block_size >= 1 && ds.block_size <= ds.n, "dictionary.block_size", "must lie in [1, n]");
    }
    if (ds.kind == "gaussian") { require(ds.p >= 1, "dictionary.p", "must be >= 1"); }

    if (root.has("distribution")) {
      Section p(root.raw("distribution"), "distribution", {"kind", "values"});
      cfg.distribution.kind = p.str("kind", "uniform");
      cfg.distribution.values = p.number_list("values");
    }
    require_one_of(cfg.distribution.kind, {"uniform", "optimal", "explicit"}, "distribution.kind");
    require(cfg.distribution.kind != "explicit" || !cfg.distribution.values.empty(), "distribution.values",
            "required for an explicit distribution");
    require(ds.kind != "gaussian" || cfg.distribution.kind == "uniform", "distribution.kind",
            "Gaussian dictionaries ignore the distribution; use uniform");
  }

  if (root.has("signal")) {
    Section s(root.raw("signal"), "signal", {"class", "s", "support"});
    cfg.signal.signal_class = s.str("class", "generic");
    cfg.signal.s_values = s.int_list("s");
    cfg.signal.support = s.int_list("support");
  }
  require_one_of(cfg.signal.signal_class, {"generic", "pathological"}, "signal.class");
  require_positive(cfg.signal.s_values, "signal.s");
  if (cfg.signal.signal_class == "pathological") {
    require(cfg.dictionary.kind == "line" || cfg.dictionary.kind == "rows_columns", "signal.class",
            "pathological signals need a grid dictionary");
  }
  for (Index i : cfg.signal.support) {
    require(i >= 0 && i < cfg.dictionary.n, "signal.support", "indices must lie in [0, n)");
  }

  cfg.m_values = root.int_list("m_values");
  if (needs(cfg.scenario, {"sample", "recover", "phase", "certify", "identify", "tailcheck"})) {
    require(!cfg.m_values.empty(), "m_values", "must be non-empty");
  }
  require_positive(cfg.m_values, "m_values");
  if (needs(cfg.scenario, {"recover", "phase", "certify", "identify"}) ||
      (needs(cfg.scenario, {"coherence", "tailcheck"}) && cfg.signal.support.empty())) {
    require(!cfg.signal.s_values.empty() || !cfg.signal.support.empty(), "signal.s", "must be non-empty");
  }

  if (root.has("solver")) {
    Section s(root.raw("solver"), "solver", {"feasibility_tol", "change_tol", "max_iterations", "success_tol"});
    cfg.solver.feasibility_tol = s.number("feasibility_tol", cfg.solver.feasibility_tol);
    cfg.solver.change_tol = s.number("change_tol", cfg.solver.change_tol);
    cfg.solver.max_iterations = s.integer("max_iterations", cfg.solver.max_iterations);
    cfg.solver.success_tol = s.number("success_tol", cfg.solver.success_tol);
    require(cfg.solver.feasibility_tol > 0.0, "solver.feasibility_tol", "must be positive");
    require(cfg.solver.change_tol > 0.0, "solver.change_tol", "must be positive");
    require(cfg.solver.max_iterations >= 1, "solver.max_iterations", "must be >= 1");
    require(cfg.solver.success_tol > 0.0, "solver.success_tol", "must be positive");
  }

  if (root.has("tail")) {
    Section t(root.raw("tail"), "tail", {"events", "thresholds"});
    cfg.tail.events = t.string_list("events");
    cfg.tail.thresholds = t.number_list("thresholds");
  }
  if (cfg.scenario == "tailcheck") {
    require(!cfg.tail.events.empty(), "tail.events", "must be non-empty");
    for (auto const &e : cfg.tail.events) { require_one_of(e, {"E1", "E2", "E3", "E4"}, "tail.events"); }
    require(!cfg.tail.thresholds.empty(), "tail.thresholds", "must be non-empty");
    for (double t : cfg.tail.thresholds) { require(t > 0.0, "tail.thresholds", "entries must be positive"); }
  }

  if (root.has("gaussian")) {
    Section g(root.raw("gaussian"), "gaussian", {"s", "p", "n", "trials"});
    cfg.gaussian.s_values = g.int_list("s");
    cfg.gaussian.p_values = g.int_list("p");
    cfg.gaussian.n = g.integer("n", 0);
    cfg.gaussian.trials = g.integer("trials", cfg.gaussian.trials);
  }
  if (gaussian_only) {
    require(!cfg.gaussian.s_values.empty(), "gaussian.s", "must be non-empty");
    require(!cfg.gaussian.p_values.empty(), "gaussian.p", "must be non-empty");
    require_positive(cfg.gaussian.p_values, "gaussian.p");
    require(cfg.gaussian.n >= 2, "gaussian.n", "must be >= 2");
    for (Index s : cfg.gaussian.s_values) { require(s >= 1 && s < cfg.gaussian.n, "gaussian.s", "need 1 <= s < n"); }
    require(cfg.gaussian.trials >= 1, "gaussian.trials", "must be >= 1");
  }

  if (root.has("identify")) {
    Section i(root.raw("identify"), "identify", {"mode", "trials"});
    cfg.identify.mode = i.str("mode", "exhaustive");
    cfg.identify.trials = i.integer("trials", cfg.identify.trials);
  }
  require_one_of(cfg.identify.mode, {"exhaustive", "randomized"}, "identify.mode");
  require(cfg.identify.trials >= 1, "identify.trials", "must be >= 1");

  if (root.has("coherence_mc")) {
    Section c(root.raw("coherence_mc"), "coherence_mc", {"trials", "quantile"});
    cfg.coherence_mc.trials = c.integer("trials", cfg.coherence_mc.trials);
    cfg.coherence_mc.quantile = c.number("quantile", cfg.coherence_mc.quantile);
    require(cfg.coherence_mc.trials >= 1, "coherence_mc.trials", "must be >= 1");
    require(cfg.coherence_mc.quantile > 0.0 && cfg.coherence_mc.quantile <= 1.0, "coherence_mc.quantile",
            "must lie in (0, 1]");
  }

  if (root.has("output")) {
    Section o(root.raw("output"), "output", {"dir", "prefix"});
    cfg.output_dir = o.str("dir", cfg.output_dir);
    cfg.output_prefix = o.str("prefix", "");
  }
  return cfg;
}

ExperimentConfig load_config(std::string const &path, std::string const &scenario)
{
  std::ifstream in(path);
  if (!in) { throw ConfigError("<file>", "cannot open '" + path + "'"); }
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (nlohmann::json::parse_error const &e) {
    throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc, scenario);
}

Json canonical_json(ExperimentConfig const &cfg)
{
  auto const &d = cfg.dictionary;
  return Json{{"scenario", cfg.scenario},
              {"seed", cfg.seed},
              {"workers", cfg.workers},
              {"dictionary",
               {{"kind", d.kind}, {"transform", d.transform}, {"n", d.n}, {"sqrt_n", d.sqrt_n},
                {"block_size", d.block_size}, {"p", d.p}}},
              {"distribution", {{"kind", cfg.distribution.kind}, {"values", cfg.distribution.values}}},
              {"signal",
               {{"class", cfg.signal.signal_class}, {"s", cfg.signal.s_values}, {"support", cfg.signal.support}}},
              {"m_values", cfg.m_values},
              {"trials", cfg.trials},
              {"selection", cfg.selection},
              {"solver",
               {{"feasibility_tol", cfg.solver.feasibility_tol}, {"change_tol", cfg.solver.change_tol},
                {"max_iterations", cfg.solver.max_iterations}, {"success_tol", cfg.solver.success_tol}}},
              {"tail", {{"events", cfg.tail.events}, {"thresholds", cfg.tail.thresholds}}},
              {"gaussian",
               {{"s", cfg.gaussian.s_values}, {"p", cfg.gaussian.p_values}, {"n", cfg.gaussian.n},
                {"trials", cfg.gaussian.trials}}},
              {"identify", {{"mode", cfg.identify.mode}, {"trials", cfg.identify.trials}}},
              {"coherence_mc", {{"trials", cfg.coherence_mc.trials}, {"quantile", cfg.coherence_mc.quantile}}},
              {"eps", cfg.eps}};
}

std::uint64_t config_hash(ExperimentConfig const &cfg)
{
  // Worker count changes scheduling only, never results.
  Json j = canonical_json(cfg);
  j.erase("workers");
  return fnv1a64(j.dump());
}

namespace {

LinearOperator transform_1d(std::string const &name, Index n)
{
  if (name == "dft") { return dft_operator(n); }
  if (name == "block_diag") { return block_diag_example(n); }
  return identity_operator(n);
}

} // namespace

BlockDictionary build_dictionary(DictionarySpec const &spec)
{
  if (spec.kind == "line") { return line_blocks(transform_1d(spec.transform, spec.sqrt_n)); }
  if (spec.kind == "rows_columns") { return rows_and_columns_blocks(spec.sqrt_n); }
  if (spec.kind == "gaussian") { return gaussian_dictionary(spec.p, spec.n); }
  auto const a0 = transform_1d(spec.transform, spec.n);
  if (spec.kind == "isolated") { return partition_blocks(a0, singleton_sets(spec.n)); }
  if (spec.kind == "partition") { return partition_blocks(a0, consecutive_sets(spec.n, spec.block_size)); }
  if (spec.kind == "overlapping") {
    // Windows of block_size rows starting at every multiple of block_size/2, wrapping around.
    Index const step = std::max<Index>(1, spec.block_size / 2);
    std::vector<std::vector<Index>> sets;
    for (Index start = 0; start < spec.n; start += step) {
      std::vector<Index> set;
      for (Index j = 0; j < spec.block_size; ++j) { set.push_back((start + j) % spec.n); }
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
      sets.push_back(std::move(set));
    }
    return overlapping_blocks(a0, sets);
  }
  throw ConfigError("dictionary.kind", "unsupported kind '" + spec.kind + "'");
}

DrawingDistribution build_distribution(BlockDictionary const &dict, DistributionSpec const &spec)
{
  if (dict.is_gaussian()) { return DrawingDistribution::uniform(1); }
  if (spec.kind == "optimal") { return optimal_pi(dict); }
  if (spec.kind == "explicit") {
    if (static_cast<Index>(spec.values.size()) != dict.size()) {
      throw ConfigError("distribution.values", "needs one probability per block (" + std::to_string(dict.size()) + ")");
    }
    try {
      return DrawingDistribution(spec.values);
    } catch (std::invalid_argument const &e) {
      throw ConfigError("distribution.values", e.what());
    }
  }
  return DrawingDistribution::uniform(dict.size());
}

namespace {

// ---- provenance ------------------------------------------------------------

std::string provenance_lines(ExperimentConfig const &cfg)
{
  std::ostringstream os;
  os << "# tool: bcs " << kVersion << "\n"
     << "# scenario: " << cfg.scenario << "\n"
     << "# config_hash: " << hex64(config_hash(cfg)) << "\n"
     << "# seed: " << cfg.seed << "\n";
  return os.str();
}

Artifact csv_artifact(ExperimentConfig const &cfg, std::string name, std::string const &body)
{
  return {std::move(name), provenance_lines(cfg) + body};
}

Artifact json_artifact(ExperimentConfig const &cfg, std::string name, Json result)
{
  Json doc{{"provenance",
            {{"tool", "bcs"},
             {"version", kVersion},
             {"scenario", cfg.scenario},
             {"config_hash", hex64(config_hash(cfg))},
             {"seed", cfg.seed}}},
           {"result", std::move(result)}};
  return {std::move(name), doc.dump(2) + "\n"};
}

Artifact pgm_artifact(ExperimentConfig const &cfg, std::string name, std::string const &pgm)
{
  // Comments are legal after the magic number.
  auto const nl = pgm.find('\n');
  return {std::move(name), pgm.substr(0, nl + 1) + provenance_lines(cfg) + pgm.substr(nl + 1)};
}

std::string gray_pgm(RVector const &img, Index side)
{
  std::ostringstream os;
  os << "P2\n" << side << ' ' << side << "\n255\n";
  for (Index r = 0; r < side; ++r) {
    for (Index c = 0; c < side; ++c) {
      double const v = std::clamp(img[r * side + c], 0.0, 1.0);
      os << static_cast<int>(std::lround(255.0 * v)) << (c + 1 < side ? ' ' : '\n');
    }
  }
  return os.str();
}

std::string str(Index v) { return std::to_string(v); }

// ---- scenarios ---------------------------------------------------------------

SupportSet scenario_support(ExperimentConfig const &cfg, BlockDictionary const &dict)
{
  if (!cfg.signal.support.empty()) { return SupportSet(cfg.signal.support, dict.n()); }
  Index const s = cfg.signal.s_values.front();
  if (cfg.signal.signal_class == "pathological") {
    return pathological_signal(dict.grid_side(), s, derive_seed(cfg.seed, 0x5u)).support;
  }
  if (s > dict.n()) { throw ConfigError("signal.s", "exceeds n"); }
  Rng rng(derive_seed(cfg.seed, 0x5u));
  return SupportSet(rng.subset(dict.n(), s), dict.n());
}

std::vector<Artifact> run_coherence(ExperimentConfig const &cfg, BlockDictionary const &dict,
                                    DrawingDistribution const &pi)
{
  auto const S = scenario_support(cfg, dict);
  MonteCarloOptions mc = cfg.coherence_mc;
  mc.seed = derive_seed(cfg.seed, 0x6u);
  auto const rep = gamma(dict, pi, S, mc);
  Json result{{"dictionary", dict.label()}, {"support", S.indices()}, {"report", to_json(rep)}};
  result["required_blocks"] = {{"eps", cfg.eps},
                               {"theorem", required_blocks(rep.gamma, dict.n(), cfg.eps)},
                               {"proof", required_blocks_proof(rep.gamma, dict.n(), S.size(), cfg.eps)},
                               {"s_mu4", static_cast<double>(S.size()) * rep.mu4}};
  std::string body = csv_row({"block", "rows", "pi", "gram_1_to_inf", "gram_over_pi"});
  if (!dict.is_gaussian()) {
    auto const norms = block_gram_norms(dict);
    result["block_gram_norms"] = norms;
    result["pi"] = pi.values();
    for (Index k = 0; k < dict.size(); ++k) {
      double const g = norms[static_cast<std::size_t>(k)];
      body += csv_row({str(k), str(dict.block_rows(k)), format_double(pi[k]), format_double(g),
                       format_double(g / pi[k])});
    }
  }
  return {json_artifact(cfg, "coherence.json", result), csv_artifact(cfg, "coherence.csv", body)};
}

std::vector<Artifact> run_optimal_pi(ExperimentConfig const &cfg, BlockDictionary const &dict)
{
  auto const pi = optimal_pi(dict);
  auto const norms = block_gram_norms(dict);
  std::string body = csv_row({"block", "pi", "gram_1_to_inf"});
  for (Index k = 0; k < dict.size(); ++k) {
    body += csv_row({str(k), format_double(pi[k]), format_double(norms[static_cast<std::size_t>(k)])});
  }
  Json result{{"dictionary", dict.label()}, {"pi", pi.values()}, {"block_gram_norms", norms}};
  return {json_artifact(cfg, "optimal_pi.json", result), csv_artifact(cfg, "optimal_pi.csv", body)};
}

SampledOperator scenario_draw(ExperimentConfig const &cfg, BlockDictionary const &dict,
                              DrawingDistribution const &pi, Index m, std::uint64_t seed)
{
  if (cfg.selection == "distinct" && !dict.is_gaussian()) {
    if (m > dict.size()) { throw ConfigError("m_values", "distinct selection needs m <= block count"); }
    Rng rng(seed);
    return sampled_from_indices(dict, pi, rng.subset(dict.size(), m));
  }
  return draw_blocks(dict, pi, m, seed);
}

std::vector<Artifact> run_sample(ExperimentConfig const &cfg, BlockDictionary const &dict,
                                 DrawingDistribution const &pi)
{
  auto const a = scenario_draw(cfg, dict, pi, cfg.m_values.front(), cfg.seed);
  std::string body = csv_row({"draw", "block", "pi", "scale", "rows"});
  for (Index j = 0; j < a.draw_count(); ++j) {
    Index const rows = a.offsets[static_cast<std::size_t>(j) + 1] - a.offsets[static_cast<std::size_t>(j)];
    body += csv_row({str(j), str(a.draws[static_cast<std::size_t>(j)]),
                     format_double(a.draw_pi[static_cast<std::size_t>(j)]), format_double(a.scale(j)), str(rows)});
  }
  std::vector<Artifact> out{json_artifact(cfg, "sample.json", to_json(a)), csv_artifact(cfg, "sample.csv", body)};
  if (dict.grid_side() > 0) { out.push_back(pgm_artifact(cfg, "mask.pgm", sampling_mask_pgm(a))); }
  return out;
}

// Piecewise-constant test image: 2×2 patches with levels in [0.25, 1] on a
// zero background, about s nonzero pixels in total.
RVector synthetic_image(Index side, Index s, std::uint64_t seed)
{
  RVector img = RVector::Zero(side * side);
  Rng rng(seed);
  Index const patches = std::max<Index>(1, s / 4);
  Index placed = 0;
  for (Index attempt = 0; placed < patches && attempt < 1000 * patches; ++attempt) {
    Index const r = rng.below(side - 1);
    Index const c = rng.below(side - 1);
    bool clear = true;
    for (Index dr = -1; dr <= 2 && clear; ++dr) {
      for (Index dc = -1; dc <= 2 && clear; ++dc) {
        Index const rr = r + dr, cc = c + dc;
        if (rr >= 0 && rr < side && cc >= 0 && cc < side && img[rr * side + cc] != 0.0) { clear = false; }
      }
    }
    if (!clear) { continue; }
    double const level = 0.25 + 0.75 * rng.uniform();
    for (Index dr = 0; dr < 2; ++dr) {
      for (Index dc = 0; dc < 2; ++dc) { img[(r + dr) * side + c + dc] = level; }
    }
    ++placed;
  }
  return img;
}

std::vector<Artifact> run_recover(ExperimentConfig const &cfg, BlockDictionary const &dict,
                                  DrawingDistribution const &pi)
{
  Index side = dict.grid_side();
  if (side == 0) {
    side = static_cast<Index>(std::lround(std::sqrt(static_cast<double>(dict.n()))));
    if (side * side != dict.n()) { throw ConfigError("dictionary.n", "recover needs a square image size"); }
  }
  RVector const img = synthetic_image(side, cfg.signal.s_values.front(), derive_seed(cfg.seed, 0x7u));
  CVector const x = img.cast<Complex>();
  auto const a = scenario_draw(cfg, dict, pi, cfg.m_values.front(), derive_seed(cfg.seed, 0x8u));
  CMatrix const dense = a.dense();
  auto const res = basis_pursuit(dense, CVector(dense * x), cfg.solver, &x);
  RVector const est = res.estimate.real();
  double const db = psnr(img, est, 1.0);
  Index nonzeros = 0;
  for (Index i = 0; i < img.size(); ++i) { nonzeros += img[i] != 0.0 ? 1 : 0; }
  Json result{{"dictionary", dict.label()},
              {"side", side},
              {"nonzeros", nonzeros},
              {"sample", to_json(a)},
              {"recovery", to_json(res)},
              {"psnr_db", json_number(db)}};
  std::string body = csv_row({"pixel", "row", "col", "reference", "estimate"});
  for (Index i = 0; i < img.size(); ++i) {
    body += csv_row({str(i), str(i / side), str(i % side), format_double(img[i]), format_double(est[i])});
  }
  std::vector<Artifact> out{json_artifact(cfg, "recover.json", result), csv_artifact(cfg, "recover.csv", body),
                            pgm_artifact(cfg, "reference.pgm", gray_pgm(img, side)),
                            pgm_artifact(cfg, "estimate.pgm", gray_pgm(est, side))};
  if (dict.grid_side() > 0) { out.push_back(pgm_artifact(cfg, "mask.pgm", sampling_mask_pgm(a))); }
  return out;
}

std::vector<Artifact> run_phase(ExperimentConfig const &cfg, BlockDictionary const &dict,
                                DrawingDistribution const &pi)
{
  PhaseOptions opts;
  opts.signal = cfg.signal.signal_class == "pathological" ? SignalClass::Pathological : SignalClass::Generic;
  opts.selection = cfg.selection == "distinct" ? BlockSelection::Distinct : BlockSelection::Iid;
  opts.solver = cfg.solver;
  opts.workers = cfg.workers;
  auto const d = phase_transition(dict, pi, cfg.signal.s_values, cfg.m_values, cfg.trials, cfg.seed, opts);
  return {json_artifact(cfg, "phase.json", to_json(d)), csv_artifact(cfg, "phase.csv", phase_csv(d))};
}

std::vector<Artifact> run_certify(ExperimentConfig const &cfg, BlockDictionary const &dict,
                                  DrawingDistribution const &pi)
{
  Index const s = cfg.signal.s_values.empty() ? static_cast<Index>(cfg.signal.support.size())
                                              : cfg.signal.s_values.front();
  struct Row
  {
    CertificateReport cert;
    RecoveryResult rec;
  };
  auto const n_m = static_cast<Index>(cfg.m_values.size());
  std::vector<Row> rows(static_cast<std::size_t>(n_m * cfg.trials));
  std::vector<GolfingSchedule> schedules;
  for (Index m : cfg.m_values) {
    try {
      schedules.push_back(golfing_schedule(s, dict.n(), m, cfg.eps));
    } catch (std::invalid_argument const &e) {
      throw ConfigError("m_values", e.what());
    }
  }
  parallel_for(n_m * cfg.trials, cfg.workers, [&](Index job) {
    Index const cell = job / cfg.trials;
    Index const trial = job % cfg.trials;
    Index const m = cfg.m_values[static_cast<std::size_t>(cell)];
    std::uint64_t const ts = phase_trial_seed(cfg.seed, cell, trial);
    Rng rng(derive_seed(ts, 1));
    auto const support = cfg.signal.support.empty() ? rng.subset(dict.n(), s) : cfg.signal.support;
    SupportSet const S(support, dict.n());
    CVector x = CVector::Zero(dict.n());
    for (Index i : S.indices()) { x[i] = rng.unit_phase(); }
    auto const a = draw_blocks(dict, pi, m, derive_seed(ts, 2));
    auto const &sched = schedules[static_cast<std::size_t>(cell)];
    auto const groups = partition_for_golfing(a, sched.sizes);
    CVector e(S.size());
    for (Index j = 0; j < S.size(); ++j) { e[j] = complex_sign(x[S.indices()[static_cast<std::size_t>(j)]]); }
    auto &row = rows[static_cast<std::size_t>(job)];
    row.cert = golfing_certificate(groups, S, e, &sched);
    CMatrix const dense = a.dense();
    row.rec = basis_pursuit(dense, CVector(dense * x), cfg.solver, &x);
  });
  std::string body = csv_row(kCertifyColumns);
  Json cells = Json::array();
  for (Index cell = 0; cell < n_m; ++cell) {
    Json trials = Json::array();
    for (Index trial = 0; trial < cfg.trials; ++trial) {
      auto const &r = rows[static_cast<std::size_t>(cell * cfg.trials + trial)];
      body += csv_row({str(cfg.m_values[static_cast<std::size_t>(cell)]), str(trial), format_double(r.cert.inv_norm),
                       format_double(r.cert.max_col), format_double(r.cert.vS_err), format_double(r.cert.vSc_inf),
                       r.cert.all_pass() ? "1" : "0", r.rec.converged ? "1" : "0", r.rec.success ? "1" : "0",
                       format_double(r.rec.relative_error.value_or(0.0)), format_double(r.cert.contraction.back())});
      trials.push_back(Json{{"certificate", to_json(r.cert)}, {"recovery", to_json(r.rec)}});
    }
    cells.push_back(Json{{"m", cfg.m_values[static_cast<std::size_t>(cell)]},
                         {"schedule", to_json(schedules[static_cast<std::size_t>(cell)])},
                         {"trials", trials}});
  }
  Json result{{"dictionary", dict.label()}, {"s", s}, {"eps", cfg.eps}, {"cells", cells}};
  return {json_artifact(cfg, "certify.json", result), csv_artifact(cfg, "certify.csv", body)};
}

std::vector<Artifact> run_identify(ExperimentConfig const &cfg, BlockDictionary const &dict,
                                   DrawingDistribution const &pi)
{
  if (dict.is_gaussian()) { throw ConfigError("dictionary.kind", "identify needs a deterministic dictionary"); }
  Index const s = cfg.signal.s_values.front();
  auto const mode =
    cfg.identify.mode == "exhaustive" ? IdentifiabilityMode::Exhaustive : IdentifiabilityMode::Randomized;
  std::string body = csv_row({"m", "identifiable", "conclusive", "subsets_checked", "witness_gap"});
  Json cells = Json::array();
  for (std::size_t i = 0; i < cfg.m_values.size(); ++i) {
    Index const m = cfg.m_values[i];
    auto const a = scenario_draw(cfg, dict, pi, m, derive_seed(cfg.seed, i));
    CMatrix const full = a.dense();
    bool const reduced = cfg.signal.signal_class == "pathological" && cfg.dictionary.kind == "line";
    CMatrix const target = reduced ? line_reduced_matrix(materialize(transform_1d(cfg.dictionary.transform,
                                                                                  cfg.dictionary.sqrt_n)),
                                                         a)
                                   : full;
    IdentifiabilityResult res;
    try {
      res = identifiability_rank_test(target, s, mode, cfg.identify.trials, derive_seed(cfg.seed, 0x9u, i),
                                      cfg.workers);
    } catch (std::invalid_argument const &e) {
      throw ConfigError("identify.mode", e.what());
    }
    Json cell{{"m", m}, {"draws", a.draws}, {"reduced", reduced}, {"verdict", to_json(res)}};
    double gap = 0.0;
    if (!res.identifiable) {
      CVector const x = reduced ? lift_first_column(res.x) : res.x;
      CVector const xp = reduced ? lift_first_column(res.x_prime) : res.x_prime;
      gap = (full * x - full * xp).norm();
      cell["signal_x"] = json_complex(x);
      cell["signal_x_prime"] = json_complex(xp);
      cell["measurement_gap"] = gap;
    }
    body += csv_row({str(m), res.identifiable ? "1" : "0", res.conclusive ? "1" : "0", str(res.subsets_checked),
                     format_double(gap)});
    cells.push_back(cell);
  }
  Json result{{"dictionary", dict.label()}, {"s", s}, {"mode", cfg.identify.mode}, {"cells", cells}};
  return {json_artifact(cfg, "identify.json", result), csv_artifact(cfg, "identify.csv", body)};
}

std::vector<Artifact> run_tailcheck(ExperimentConfig const &cfg, BlockDictionary const &dict,
                                    DrawingDistribution const &pi)
{
  auto const S = scenario_support(cfg, dict);
  TailOptions opts;
  opts.workers = cfg.workers;
  opts.gaussian_mc = cfg.coherence_mc;
  opts.gaussian_mc.seed = derive_seed(cfg.seed, 0x6u);
  std::vector<TailCheckReport> reports;
  for (std::size_t e = 0; e < cfg.tail.events.size(); ++e) {
    for (std::size_t i = 0; i < cfg.m_values.size(); ++i) {
      std::vector<TailCheckReport> part;
      try {
        part = tail_check_grid(parse_tail_event(cfg.tail.events[e]), dict, pi, S, cfg.m_values[i], cfg.tail.thresholds,
                               cfg.trials, derive_seed(cfg.seed, e, i), opts);
      } catch (std::invalid_argument const &err) {
        throw ConfigError("tail.thresholds", err.what());
      }
      reports.insert(reports.end(), part.begin(), part.end());
    }
  }
  Json list = Json::array();
  for (auto const &r : reports) { list.push_back(to_json(r)); }
  Json result{{"dictionary", dict.label()}, {"support", S.indices()}, {"reports", list}};
  return {json_artifact(cfg, "tailcheck.json", result), csv_artifact(cfg, "tailcheck.csv", tail_csv(reports))};
}

std::vector<Artifact> run_gaussian(ExperimentConfig const &cfg)
{
  auto const t = gaussian_gamma_scaling(cfg.gaussian.s_values, cfg.gaussian.p_values, cfg.gaussian.n,
                                        cfg.gaussian.trials, cfg.seed, cfg.workers);
  return {json_artifact(cfg, "gaussian_scaling.json", to_json(t)),
          csv_artifact(cfg, "gaussian_scaling.csv", gaussian_csv(t))};
}

} // namespace

std::vector<Artifact> run_experiment(ExperimentConfig const &cfg)
{
  if (cfg.scenario == "gaussian-scaling") { return run_gaussian(cfg); }
  auto const dict = build_dictionary(cfg.dictionary);
  auto const pi = build_distribution(dict, cfg.distribution);
  if (cfg.scenario == "coherence") { return run_coherence(cfg, dict, pi); }
  if (cfg.scenario == "optimal-pi") { return run_optimal_pi(cfg, dict); }
  if (cfg.scenario == "sample") { return run_sample(cfg, dict, pi); }
  if (cfg.scenario == "recover") { return run_recover(cfg, dict, pi); }
  if (cfg.scenario == "phase") { return run_phase(cfg, dict, pi); }
  if (cfg.scenario == "certify") { return run_certify(cfg, dict, pi); }
  if (cfg.scenario == "identify") { return run_identify(cfg, dict, pi); }
  if (cfg.scenario == "tailcheck") { return run_tailcheck(cfg, dict, pi); }
  throw ConfigError("scenario", "unknown scenario '" + cfg.scenario + "'");
}

std::vector<std::string> write_artifacts(ExperimentConfig const &cfg, std::vector<Artifact> const &artifacts)
{
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  std::vector<std::string> paths;
  for (auto const &a : artifacts) {
    auto const path = (fs::path(cfg.output_dir) / (cfg.output_prefix + a.name)).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) { throw std::runtime_error("cannot write '" + path + "'"); }
    out << a.content;
    paths.push_back(path);
  }
  return paths;
}

namespace {

struct Provenance
{
  std::string scenario;
  std::string hash;
  std::optional<std::uint64_t> seed;
};

Provenance read_provenance(std::string const &content)
{
  Provenance p;
  if (!content.empty() && content.front() == '{') {
    auto const doc = Json::parse(content, nullptr, false);
    if (doc.is_discarded() || !doc.contains("provenance")) { return p; }
    auto const &pr = doc.at("provenance");
    p.scenario = pr.value("scenario", "");
    p.hash = pr.value("config_hash", "");
    if (pr.contains("seed")) { p.seed = pr.at("seed").get<std::uint64_t>(); }
    return p;
  }
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    auto take = [&](std::string const &key) -> std::optional<std::string> {
      std::string const tag = "# " + key + ": ";
      if (line.rfind(tag, 0) == 0) { return line.substr(tag.size()); }
      return std::nullopt;
    };
    if (auto v = take("scenario")) { p.scenario = *v; }
    if (auto v = take("config_hash")) { p.hash = *v; }
    if (auto v = take("seed")) { p.seed = std::stoull(*v); }
  }
  return p;
}

} // namespace

ReplayResult replay(ExperimentConfig cfg, std::string const &file_name, std::string const &file_content)
{
  auto const prov = read_provenance(file_content);
  if (prov.hash.empty() || !prov.seed) { return {false, "no provenance header found"}; }
  if (prov.scenario != cfg.scenario) {
    return {false, "file is from scenario '" + prov.scenario + "', config is '" + cfg.scenario + "'"};
  }
  cfg.seed = *prov.seed;
  std::string const expected = hex64(config_hash(cfg));
  if (expected != prov.hash) { return {false, "config hash mismatch: file " + prov.hash + ", config " + expected}; }
  auto const artifacts = run_experiment(cfg);
  std::string const base = std::filesystem::path(file_name).filename().string();
  Artifact const *match = nullptr;
  for (auto const &a : artifacts) {
    if (base.size() >= a.name.size() && base.compare(base.size() - a.name.size(), a.name.size(), a.name) == 0) {
      if (!match || a.name.size() > match->name.size()) { match = &a; }
    }
  }
  if (!match) { return {false, "no artifact of this scenario matches '" + base + "'"}; }
  if (match->content != file_content) { return {false, "regenerated " + match->name + " differs from the file"}; }
  return {true, "reproduced " + match->name + " (config " + expected + ", seed " + std::to_string(cfg.seed) + ")"};
}

} // namespace bcs
