// JSON and CSV interchange for channels, paths, rates and reports.
//
// Conventions: complex numbers are [re, im] pairs, matrices are row-major
// arrays of such pairs, user indices are 1-based in every document, and
// floating-point output is rounded to 12 significant digits.
#pragma once

#include <json.hpp>

#include <string>

#include "msefield/channel.hpp"
#include "msefield/path.hpp"
#include "msefield/rates.hpp"
#include "msefield/region.hpp"
#include "msefield/simulate.hpp"
#include "msefield/transfer.hpp"

namespace msefield::io {

/// Nearest double with 12 significant decimal digits.
double round_sig(double x, int digits = 12);

std::string units_name(RateUnits units);
RateUnits units_from_name(const std::string& name);

nlohmann::json channel_to_json(const MacChanneld& ch);
MacChanneld mac_channel_from_json(const nlohmann::json& j);

nlohmann::json mimo_channel_to_json(const MimoMacChanneld& ch);
MimoMacChanneld mimo_channel_from_json(const nlohmann::json& j);

nlohmann::json path_to_json(const DecodingPathd& path);
DecodingPathd path_from_json(const nlohmann::json& j);

nlohmann::json rate_tuple_to_json(const RateTupled& rates);
std::string rate_tuple_to_csv(const RateTupled& rates);

nlohmann::json region_constraints_to_json(const std::vector<RegionConstraintd>& constraints);
nlohmann::json feasibility_to_json(const FeasibilityReportd& report);

nlohmann::json mc_report_to_json(const MonteCarloReportd& report);

std::string trajectory_to_csv(const Trajectoryd& trajectory);

/// (rho, v) rows of the curve evaluated on a linear grid over
/// [rho_begin, rho_end], endpoints included.
std::string dec_curve_to_csv(const DecCharacteristicd& dec, double rho_begin, double rho_end,
                             int points);

}  // namespace msefield::io
