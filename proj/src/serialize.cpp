#include "bcs/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace bcs {

std::string format_double(double v)
{
  if (std::isnan(v)) { return "nan"; }
  if (std::isinf(v)) { return v > 0 ? "inf" : "-inf"; }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json json_number(double v)
{
  if (std::isfinite(v)) { return v; }
  return format_double(v);
}

Json json_complex(CVector const &v)
{
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) { out.push_back({v[i].real(), v[i].imag()}); }
  return out;
}

CVector complex_from_json(Json const &j)
{
  CVector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Index>(i)] = Complex(j[i].at(0).get<double>(), j[i].at(1).get<double>());
  }
  return v;
}

Json to_json(CoherenceReport const &r)
{
  return Json{{"mu1", json_number(r.mu1)},
              {"mu2", json_number(r.mu2)},
              {"mu3", json_number(r.mu3)},
              {"mu4", json_number(r.mu4)},
              {"gamma", json_number(r.gamma)},
              {"s", r.s},
              {"mode", r.mode == CoherenceMode::Exact ? "exact" : "monte-carlo"},
              {"trials", r.trials},
              {"quantile", r.quantile},
              {"mu1_block", r.mu1_block},
              {"mu2_block", r.mu2_block},
              {"mu2_column", r.mu2_column},
              {"mu3_column", r.mu3_column},
              {"mu4_block", r.mu4_block}};
}

Json to_json(DualityConditions const &d)
{
  return Json{{"inv_norm", json_number(d.inv_norm)},
              {"max_col", json_number(d.max_col)},
              {"singular", d.singular},
              {"inv_ok", d.inv_ok},
              {"col_ok", d.col_ok}};
}

Json to_json(GolfingSchedule const &g)
{
  return Json{{"L", g.L}, {"sizes", g.sizes}, {"r", g.r}, {"t", g.t}};
}

Json to_json(CertificateReport const &r)
{
  Json j{{"inv_norm", json_number(r.inv_norm)},
         {"max_col", json_number(r.max_col)},
         {"vS_err", json_number(r.vS_err)},
         {"vSc_inf", json_number(r.vSc_inf)},
         {"inv_ok", r.inv_ok},
         {"col_ok", r.col_ok},
         {"vS_ok", r.vS_ok},
         {"vSc_ok", r.vSc_ok},
         {"all_pass", r.all_pass()},
         {"contraction", r.contraction},
         {"group_norms", r.group_norms}};
  if (!r.contraction_ok.empty()) {
    j["contraction_ok"] = r.contraction_ok;
    j["off_support_ok"] = r.off_support_ok;
  }
  return j;
}

Json to_json(IdentifiabilityResult const &r)
{
  Json j{{"identifiable", r.identifiable}, {"conclusive", r.conclusive}, {"subsets_checked", r.subsets_checked}};
  if (!r.identifiable) {
    j["failing_set"] = r.failing_set;
    j["h"] = json_complex(r.h);
    j["x"] = json_complex(r.x);
    j["x_prime"] = json_complex(r.x_prime);
  }
  return j;
}

Json to_json(TailCheckReport const &r)
{
  return Json{{"event", to_string(r.event)},
              {"threshold", r.threshold},
              {"m", r.m},
              {"s", r.s},
              {"trials", r.trials},
              {"occurrences", r.occurrences},
              {"frequency", r.frequency},
              {"wilson_lo", r.wilson.lo},
              {"wilson_hi", r.wilson.hi},
              {"bound", json_number(r.bound)},
              {"pass", r.pass},
              {"mu1", r.mu1},
              {"mu2", r.mu2},
              {"mu3", r.mu3},
              {"seed", r.seed}};
}

Json to_json(PhaseDiagram const &d)
{
  Json cells = Json::array();
  for (auto const &c : d.cells) {
    cells.push_back(Json{{"cell", c.cell},
                         {"s", c.s},
                         {"m", c.m},
                         {"trials", c.trials},
                         {"successes", c.successes},
                         {"nonconverged", c.nonconverged},
                         {"frequency", c.frequency},
                         {"wilson_lo", c.wilson.lo},
                         {"wilson_hi", c.wilson.hi},
                         {"mean_iterations", c.mean_iterations}});
  }
  return Json{{"dictionary", d.dictionary},
              {"pi", d.pi},
              {"seed", d.seed},
              {"signal", to_string(d.signal)},
              {"selection", to_string(d.selection)},
              {"cells", cells}};
}

Json to_json(GaussianScalingTable const &t)
{
  Json rows = Json::array();
  for (auto const &r : t.rows) {
    rows.push_back(Json{{"s", r.s},
                        {"p", r.p},
                        {"mu1", r.mu1},
                        {"mu2", r.mu2},
                        {"mu3", r.mu3},
                        {"gamma", r.gamma},
                        {"model", r.model}});
  }
  return Json{{"n", t.n},
              {"trials", t.trials},
              {"seed", t.seed},
              {"fit_a", t.fit_a},
              {"fit_residual", t.fit_residual},
              {"rows", rows}};
}

Json to_json(SampledOperator const &a)
{
  return Json{{"dictionary", a.dictionary.label()},
              {"seed", a.seed},
              {"m", a.m},
              {"rows", a.rows()},
              {"draws", a.draws},
              {"pi", a.draw_pi}};
}

Json to_json(RecoveryResult const &r)
{
  Json j{{"iterations", r.iterations},
         {"residual", json_number(r.residual)},
         {"objective", json_number(r.objective)},
         {"converged", r.converged},
         {"success", r.success}};
  if (r.relative_error) { j["relative_error"] = json_number(*r.relative_error); }
  return j;
}

std::vector<std::string> const kPhaseColumns = {"cell",       "s",         "m",        "trials",
                                                "successes",  "nonconverged", "frequency", "wilson_lo",
                                                "wilson_hi",  "mean_iterations"};
std::vector<std::string> const kTailColumns = {"event",     "m",         "threshold", "trials", "occurrences",
                                               "frequency", "wilson_lo", "wilson_hi", "bound",  "pass",
                                               "mu1",       "mu2",       "mu3"};
std::vector<std::string> const kGaussianColumns = {"s", "p", "mu1", "mu2", "mu3", "gamma", "model"};
std::vector<std::string> const kCertifyColumns = {"m", "trial",   "inv_norm",  "max_col",   "vS_err",  "vSc_inf",
                                                  "all_pass", "converged", "recovered", "rel_error", "final_w"};

std::string csv_row(std::vector<std::string> const &fields)
{
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) { out += ','; }
    out += fields[i];
  }
  out += '\n';
  return out;
}

namespace {

std::string str(Index v) { return std::to_string(v); }

} // namespace

std::string phase_csv(PhaseDiagram const &d)
{
  std::string out = csv_row(kPhaseColumns);
  for (auto const &c : d.cells) {
    out += csv_row({str(c.cell), str(c.s), str(c.m), str(c.trials), str(c.successes), str(c.nonconverged),
                    format_double(c.frequency), format_double(c.wilson.lo), format_double(c.wilson.hi),
                    format_double(c.mean_iterations)});
  }
  return out;
}

std::string tail_csv(std::vector<TailCheckReport> const &reports)
{
  std::string out = csv_row(kTailColumns);
  for (auto const &r : reports) {
    out += csv_row({to_string(r.event), str(r.m), format_double(r.threshold), str(r.trials), str(r.occurrences),
                    format_double(r.frequency), format_double(r.wilson.lo), format_double(r.wilson.hi),
                    format_double(r.bound), r.pass ? "1" : "0", format_double(r.mu1), format_double(r.mu2),
                    format_double(r.mu3)});
  }
  return out;
}

std::string gaussian_csv(GaussianScalingTable const &t)
{
  std::string out = csv_row(kGaussianColumns);
  for (auto const &r : t.rows) {
    out += csv_row({str(r.s), str(r.p), format_double(r.mu1), format_double(r.mu2), format_double(r.mu3),
                    format_double(r.gamma), format_double(r.model)});
  }
  return out;
}

std::uint64_t fnv1a64(std::string const &data)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

} // namespace bcs
