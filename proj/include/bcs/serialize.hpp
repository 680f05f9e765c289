#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcs/certificates.hpp"
#include "bcs/coherence.hpp"
#include "bcs/montecarlo.hpp"
#include "bcs/sampling.hpp"
#include "bcs/solver.hpp"

namespace bcs {

using Json = nlohmann::ordered_json;

/// 17 significant digits; "inf", "-inf", "nan" for non-finite values.
std::string format_double(double v);

/// JSON number, or the strings "inf"/"-inf"/"nan" when not finite.
Json json_number(double v);

/// Complex vector as [[re, im], ...].
Json json_complex(CVector const &v);
CVector complex_from_json(Json const &j);

Json to_json(CoherenceReport const &r);
Json to_json(DualityConditions const &d);
Json to_json(GolfingSchedule const &g);
Json to_json(CertificateReport const &r);
Json to_json(IdentifiabilityResult const &r);
Json to_json(TailCheckReport const &r);
Json to_json(PhaseDiagram const &d);
Json to_json(GaussianScalingTable const &t);
/// Drawn indices K with their probabilities and the seed.
Json to_json(SampledOperator const &a);
Json to_json(RecoveryResult const &r);

/// Column names of each CSV table, in output order.
extern std::vector<std::string> const kPhaseColumns;
extern std::vector<std::string> const kTailColumns;
extern std::vector<std::string> const kGaussianColumns;
extern std::vector<std::string> const kCertifyColumns;

std::string csv_row(std::vector<std::string> const &fields);
std::string phase_csv(PhaseDiagram const &d);
std::string tail_csv(std::vector<TailCheckReport> const &reports);
std::string gaussian_csv(GaussianScalingTable const &t);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string const &data);
std::string hex64(std::uint64_t v);

} // namespace bcs
