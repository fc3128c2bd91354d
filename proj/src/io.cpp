#include "msefield/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace msefield::io {

using nlohmann::json;

double round_sig(double x, int digits) {
  if (!std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return std::strtod(buf, nullptr);
}

std::string units_name(RateUnits units) {
  return units == RateUnits::Nats ? "nats" : "bits";
}

RateUnits units_from_name(const std::string& name) {
  if (name == "nats") return RateUnits::Nats;
  if (name == "bits") return RateUnits::Bits;
  throw std::invalid_argument("units must be \"nats\" or \"bits\", got \"" + name + "\"");
}

namespace {

json complex_to_json(const std::complex<double>& z) {
  return json::array({round_sig(z.real()), round_sig(z.imag())});
}

std::complex<double> complex_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) {
    throw std::invalid_argument(where + ": complex values must be [re, im] pairs");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

const json& require(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw std::invalid_argument(where + ": missing required key \"" + key + "\"");
  }
  return *it;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(round_sig(v[i]));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw std::invalid_argument(where + ": expected an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

json channel_to_json(const MacChanneld& ch) {
  json users = json::array();
  for (int k = 0; k < ch.num_users(); ++k) {
    users.push_back({{"power", round_sig(ch.powers()[k])},
                     {"fading", complex_to_json(ch.fading()[k])}});
  }
  return {{"users", users}, {"noise_var", round_sig(ch.noise_var())}};
}

MacChanneld mac_channel_from_json(const json& j) {
  const std::string where = "channel";
  const json& users = require(j, "users", where);
  if (!users.is_array() || users.empty()) {
    throw std::invalid_argument(where + ": \"users\" must be a non-empty array");
  }
  const int num_users = static_cast<int>(users.size());
  Eigen::VectorXd powers(num_users);
  Eigen::VectorXcd fading(num_users);
  for (int k = 0; k < num_users; ++k) {
    const std::string entry = where + ".users[" + std::to_string(k) + "]";
    powers[k] = require(users[k], "power", entry).get<double>();
    fading[k] = complex_from_json(require(users[k], "fading", entry), entry + ".fading");
  }
  return MacChanneld(powers, fading, require(j, "noise_var", where).get<double>());
}

json mimo_channel_to_json(const MimoMacChanneld& ch) {
  json users = json::array();
  for (int k = 0; k < ch.num_users(); ++k) {
    const auto& h = ch.channel(k);
    json rows = json::array();
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < h.cols(); ++c) row.push_back(complex_to_json(h(r, c)));
      rows.push_back(row);
    }
    users.push_back({{"power", round_sig(ch.powers()[k])}, {"channel", rows}});
  }
  return {{"users", users}, {"noise_var", round_sig(ch.noise_var())}};
}

MimoMacChanneld mimo_channel_from_json(const json& j) {
  const std::string where = "mimo_channel";
  const json& users = require(j, "users", where);
  if (!users.is_array() || users.empty()) {
    throw std::invalid_argument(where + ": \"users\" must be a non-empty array");
  }
  const int num_users = static_cast<int>(users.size());
  std::vector<Eigen::MatrixXcd> channels(num_users);
  Eigen::VectorXd powers(num_users);
  for (int k = 0; k < num_users; ++k) {
    const std::string entry = where + ".users[" + std::to_string(k) + "]";
    powers[k] = require(users[k], "power", entry).get<double>();
    const json& rows = require(users[k], "channel", entry);
    if (!rows.is_array() || rows.empty()) {
      throw std::invalid_argument(entry + ".channel: expected a non-empty array of rows");
    }
    const std::size_t ncols = rows[0].is_array() ? rows[0].size() : 0;
    if (ncols == 0) {
      throw std::invalid_argument(entry + ".channel: rows must be non-empty arrays");
    }
    Eigen::MatrixXcd h(rows.size(), ncols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!rows[r].is_array() || rows[r].size() != ncols) {
        throw std::invalid_argument(entry + ".channel: ragged rows");
      }
      for (std::size_t c = 0; c < ncols; ++c) {
        h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            complex_from_json(rows[r][c], entry + ".channel");
      }
    }
    channels[k] = std::move(h);
  }
  return MimoMacChanneld(std::move(channels), powers,
                         require(j, "noise_var", where).get<double>());
}

json path_to_json(const DecodingPathd& path) {
  switch (path.kind()) {
    case PathKind::StraightLine:
      return {{"kind", "straight"}, {"num_users", path.num_users()}};
    case PathKind::SicOrder: {
      json order = json::array();
      for (int u : path.order()) order.push_back(u + 1);
      return {{"kind", "sic"}, {"order", order}};
    }
    case PathKind::PiecewiseLinear:
    default: {
      json points = json::array();
      for (int c = 0; c < path.num_waypoints(); ++c) {
        points.push_back(vector_to_json(path.waypoints().col(c)));
      }
      return {{"kind", "waypoints"}, {"waypoints", points}};
    }
  }
}

DecodingPathd path_from_json(const json& j) {
  const std::string where = "path";
  const std::string kind = require(j, "kind", where).get<std::string>();
  if (kind == "straight") {
    return DecodingPathd::straight_line(require(j, "num_users", where).get<int>());
  }
  if (kind == "sic") {
    const json& arr = require(j, "order", where);
    std::vector<int> order;
    for (const auto& u : arr) order.push_back(u.get<int>() - 1);
    return DecodingPathd::sic(std::move(order));
  }
  if (kind == "waypoints") {
    const json& points = require(j, "waypoints", where);
    if (!points.is_array() || points.size() < 2) {
      throw std::invalid_argument(where + ": \"waypoints\" needs at least two points");
    }
    const Eigen::VectorXd first = vector_from_json(points[0], where + ".waypoints[0]");
    Eigen::MatrixXd w(first.size(), points.size());
    w.col(0) = first;
    for (std::size_t i = 1; i < points.size(); ++i) {
      const Eigen::VectorXd p =
          vector_from_json(points[i], where + ".waypoints[" + std::to_string(i) + "]");
      if (p.size() != first.size()) {
        throw std::invalid_argument(where + ": waypoints have inconsistent lengths");
      }
      w.col(static_cast<Eigen::Index>(i)) = p;
    }
    return DecodingPathd::piecewise_linear(std::move(w));
  }
  throw std::invalid_argument(where + ": unknown kind \"" + kind +
                              "\" (expected straight, sic, or waypoints)");
}

json rate_tuple_to_json(const RateTupled& rates) {
  return {{"per_user", vector_to_json(rates.per_user)},
          {"sum", round_sig(rates.sum)},
          {"units", units_name(rates.units)}};
}

std::string rate_tuple_to_csv(const RateTupled& rates) {
  std::string out = "user,rate_" + units_name(rates.units) + "\n";
  char buf[64];
  for (Eigen::Index k = 0; k < rates.per_user.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%lld,%.12g\n", static_cast<long long>(k + 1),
                  rates.per_user[k]);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "sum,%.12g\n", rates.sum);
  out += buf;
  return out;
}

namespace {

json constraint_to_json(const RegionConstraintd& c) {
  json subset = json::array();
  for (int k : c.subset) subset.push_back(k + 1);
  return {{"subset", subset}, {"bound", round_sig(c.bound)}};
}

}  // namespace

json region_constraints_to_json(const std::vector<RegionConstraintd>& constraints) {
  json arr = json::array();
  for (const auto& c : constraints) arr.push_back(constraint_to_json(c));
  return arr;
}

json feasibility_to_json(const FeasibilityReportd& report) {
  json violated = json::array();
  for (const auto& c : report.violated) violated.push_back(constraint_to_json(c));
  json tight = json::array();
  for (const auto& c : report.tight) tight.push_back(constraint_to_json(c));
  return {{"feasible", report.feasible}, {"violated", violated}, {"tight", tight}};
}

json mc_report_to_json(const MonteCarloReportd& report) {
  json users = json::array();
  for (Eigen::Index k = 0; k < report.empirical_sinr.size(); ++k) {
    users.push_back({{"empirical_sinr", round_sig(report.empirical_sinr[k])},
                     {"predicted_sinr", round_sig(report.predicted_sinr[k])},
                     {"sinr_standard_error", round_sig(report.sinr_standard_error[k])},
                     {"residual_variance", round_sig(report.residual_variance[k])},
                     {"residual_standard_error", round_sig(report.residual_standard_error[k])},
                     {"predicted_residual_variance",
                      round_sig(report.predicted_residual_variance[k])}});
  }
  return {{"samples", report.samples}, {"seed", report.seed}, {"users", users}};
}

std::string trajectory_to_csv(const Trajectoryd& trajectory) {
  const int num_users = static_cast<int>(trajectory.mse.rows());
  std::string out = "n";
  for (int k = 1; k <= num_users; ++k) out += ",v_" + std::to_string(k);
  for (int k = 1; k <= num_users; ++k) out += ",rho_" + std::to_string(k);
  out += "\n";
  char buf[64];
  for (Eigen::Index i = 0; i < trajectory.mse.cols(); ++i) {
    out += std::to_string(i);
    for (int k = 0; k < num_users; ++k) {
      std::snprintf(buf, sizeof(buf), ",%.12g", trajectory.mse(k, i));
      out += buf;
    }
    for (int k = 0; k < num_users; ++k) {
      std::snprintf(buf, sizeof(buf), ",%.12g", trajectory.snr(k, i));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::string dec_curve_to_csv(const DecCharacteristicd& dec, double rho_begin, double rho_end,
                             int points) {
  if (points < 2) throw std::invalid_argument("dec_curve_to_csv: need at least 2 points");
  if (!(rho_end >= rho_begin)) {
    throw std::invalid_argument("dec_curve_to_csv: rho range is reversed");
  }
  std::string out = "rho,v\n";
  char buf[64];
  for (int i = 0; i < points; ++i) {
    const double rho =
        rho_begin + (rho_end - rho_begin) * static_cast<double>(i) / (points - 1);
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", rho, dec_apply(dec, rho));
    out += buf;
  }
  return out;
}

}  // namespace msefield::io
