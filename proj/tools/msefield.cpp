// msefield: rate and transfer-curve analysis for Gaussian multiple-access
// channels with iterative soft-cancellation receivers.
//
// Exit codes: 0 success, 1 domain-level negative result (infeasible target,
// stalled receiver, out-of-tolerance validation), 2 usage or config error.
#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <msefield/io.hpp>
#include <msefield/mimo.hpp>
#include <msefield/rates.hpp>
#include <msefield/region.hpp>
#include <msefield/simulate.hpp>

using json = nlohmann::json;
using namespace msefield;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitConfig = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::string out_path;                 // empty: stdout
  std::optional<std::string> units;
  std::optional<std::string> output;   // json | csv
  std::optional<double> tolerance;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> path_name;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file")->required();
  cmd->add_option("--out", opts.out_path, "write the result here instead of stdout");
  cmd->add_option("--units", opts.units, "rate units: nats or bits");
  cmd->add_option("--output", opts.output, "output format: json or csv");
  cmd->add_option("--tolerance", opts.tolerance, "quadrature refinement tolerance");
  cmd->add_option("--seed", opts.seed, "random seed");
  cmd->add_option("--path", opts.path_name, "name of a path declared in the config");
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
}

const json& require_key(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing required key \"" + where + "\"");
  return *it;
}

json section_or_empty(const json& cfg, const std::string& name) {
  return cfg.contains(name) ? cfg.at(name) : json::object();
}

// flag > command section > top level > fallback
template <typename T>
T setting(const std::optional<T>& flag, const json& section, const json& cfg,
          const std::string& key, T fallback) {
  if (flag) return *flag;
  if (section.contains(key)) return section.at(key).get<T>();
  if (cfg.contains(key)) return cfg.at(key).get<T>();
  return fallback;
}

RateUnits resolve_units(const CommonOptions& opts, const json& section, const json& cfg) {
  return io::units_from_name(
      setting<std::string>(opts.units, section, cfg, "units", "nats"));
}

std::string resolve_output(const CommonOptions& opts, const json& section, const json& cfg) {
  const std::string fmt = setting<std::string>(opts.output, section, cfg, "output", "json");
  if (fmt != "json" && fmt != "csv") {
    throw ConfigError("output must be \"json\" or \"csv\", got \"" + fmt + "\"");
  }
  return fmt;
}

QuadratureSpecd resolve_quadrature(const CommonOptions& opts, const json& section,
                                   const json& cfg) {
  QuadratureSpecd spec;
  spec.refinement_tolerance =
      setting<double>(opts.tolerance, section, cfg, "tolerance", spec.refinement_tolerance);
  if (section.contains("base_samples")) spec.base_samples = section.at("base_samples").get<int>();
  return spec;
}

MacChanneld scalar_channel(const json& cfg) {
  return io::mac_channel_from_json(require_key(cfg, "channel", "channel"));
}

DecodingPathd named_path(const json& cfg, const CommonOptions& opts, const json& section,
                         const std::string& section_name) {
  std::string name;
  if (opts.path_name) {
    name = *opts.path_name;
  } else if (section.contains("path")) {
    name = section.at("path").get<std::string>();
  } else {
    throw ConfigError("missing required key \"" + section_name + ".path\"");
  }
  const json& paths = require_key(cfg, "paths", "paths");
  if (!paths.contains(name)) {
    throw ConfigError("config declares no path named \"" + name + "\"");
  }
  return io::path_from_json(paths.at(name));
}

void emit(const CommonOptions& opts, const std::string& text) {
  if (opts.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opts.out_path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + opts.out_path);
  out << text;
}

void emit_json(const CommonOptions& opts, const json& doc) {
  emit(opts, doc.dump(2) + "\n");
}

int cmd_rates(const CommonOptions& opts) {
  const json cfg = load_config(opts.config_path);
  const json section = section_or_empty(cfg, "rates");
  const MacChanneld ch = scalar_channel(cfg);
  const DecodingPathd path = named_path(cfg, opts, section, "rates");
  const QuadratureSpecd spec = resolve_quadrature(opts, section, cfg);
  const RateUnits units = resolve_units(opts, section, cfg);

  const std::string alphabet =
      section.contains("alphabet") ? section.at("alphabet").get<std::string>() : "gaussian";
  RateTupled rates;
  if (alphabet == "gaussian") {
    rates = rates_gaussian(ch, path, spec);
  } else if (alphabet == "qpsk") {
    rates = rate_general_alphabet(ch, path, MmseFunctiond::qpsk(), spec);
  } else {
    throw ConfigError("rates.alphabet must be \"gaussian\" or \"qpsk\"");
  }
  rates = convert_units(rates, units);

  if (resolve_output(opts, section, cfg) == "csv") {
    emit(opts, io::rate_tuple_to_csv(rates));
  } else {
    emit_json(opts, io::rate_tuple_to_json(rates));
  }
  return kExitOk;
}

int cmd_region(const CommonOptions& opts, bool synthesize,
               const std::vector<double>& target_flag) {
  const json cfg = load_config(opts.config_path);
  const json section = section_or_empty(cfg, "region");
  const MacChanneld ch = scalar_channel(cfg);
  const RateUnits units = resolve_units(opts, section, cfg);
  const double slack = section.contains("slack") ? section.at("slack").get<double>() : 1e-9;
  const double tol = setting<double>(opts.tolerance, section, cfg, "tolerance", 1e-6);
  if (!synthesize && section.contains("synthesize")) {
    synthesize = section.at("synthesize").get<bool>();
  }

  Eigen::VectorXd target_values;
  if (!target_flag.empty()) {
    target_values = Eigen::Map<const Eigen::VectorXd>(target_flag.data(),
                                                      static_cast<Eigen::Index>(target_flag.size()));
  } else {
    const json& t = require_key(section, "target", "region.target");
    target_values.resize(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
      target_values[static_cast<Eigen::Index>(i)] = t[i].get<double>();
    }
  }
  RateTupled target;
  target.per_user = target_values;
  target.sum = target_values.sum();
  target.units = units;

  const auto constraints = enumerate_constraints(ch);
  const auto report = is_feasible(ch, target, slack);

  json doc = {{"units", io::units_name(RateUnits::Nats)},
              {"target_units", io::units_name(units)},
              {"constraints", io::region_constraints_to_json(constraints)},
              {"feasibility", io::feasibility_to_json(report)}};

  int code = report.feasible ? kExitOk : kExitDomain;
  if (!report.feasible) {
    std::cerr << "target is infeasible; binding constraints:";
    for (const auto& c : report.violated) {
      std::cerr << " " << detail::subset_to_string(c.subset);
    }
    std::cerr << "\n";
  } else if (synthesize) {
    try {
      const DecodingPathd path = synthesize_path_for_tuple(ch, target, tol);
      const RateTupled achieved = convert_units(rates_gaussian(ch, path), units);
      doc["path"] = io::path_to_json(path);
      doc["achieved"] = io::rate_tuple_to_json(achieved);
    } catch (const OffSumRateFaceError& e) {
      std::cerr << e.what() << "\n";
      doc["synthesis_error"] = e.what();
      code = kExitDomain;
    }
  }

  if (resolve_output(opts, section, cfg) == "csv") {
    std::string csv = "subset,bound_nats,target_sum_nats,status\n";
    const RateTupled nats = convert_units(target, RateUnits::Nats);
    char buf[160];
    for (const auto& c : constraints) {
      double sum = 0;
      for (int k : c.subset) sum += nats.per_user[k];
      const char* status = sum > c.bound + slack            ? "violated"
                           : std::abs(sum - c.bound) <= slack ? "tight"
                                                              : "ok";
      std::string subset;
      for (std::size_t i = 0; i < c.subset.size(); ++i) {
        subset += (i ? "+" : "") + std::to_string(c.subset[i] + 1);
      }
      std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%s\n", subset.c_str(), c.bound, sum,
                    status);
      csv += buf;
    }
    emit(opts, csv);
  } else {
    emit_json(opts, doc);
  }
  return code;
}

int cmd_dec_curve(const CommonOptions& opts, std::optional<int> user_flag,
                  std::optional<int> grid_flag) {
  const json cfg = load_config(opts.config_path);
  const json section = section_or_empty(cfg, "dec_curve");
  const MacChanneld ch = scalar_channel(cfg);
  const DecodingPathd path = named_path(cfg, opts, section, "dec_curve");
  const int user_1based =
      user_flag ? *user_flag
                : require_key(section, "user", "dec_curve.user").get<int>();
  if (user_1based < 1 || user_1based > ch.num_users()) {
    throw ConfigError("dec_curve.user must be in 1.." + std::to_string(ch.num_users()));
  }
  const int user = user_1based - 1;
  const int grid = grid_flag ? *grid_flag
                             : (section.contains("grid_size")
                                    ? section.at("grid_size").get<int>()
                                    : 1024);

  const auto dec = synthesize_matching_dec(ch, path, user, std::max(grid, 2));
  const auto bounds = ese_snr_bounds(ch);
  if (resolve_output(opts, section, cfg) == "json") {
    json rho = json::array(), mse = json::array();
    for (int i = 0; i < grid; ++i) {
      const double r =
          bounds.min[user] + (bounds.max[user] - bounds.min[user]) * i / (grid - 1);
      rho.push_back(io::round_sig(r));
      mse.push_back(io::round_sig(dec_apply(dec, r)));
    }
    emit_json(opts, json{{"user", user_1based}, {"rho", rho}, {"v", mse}});
  } else {
    emit(opts, io::dec_curve_to_csv(dec, bounds.min[user], bounds.max[user], grid));
  }
  return kExitOk;
}

int cmd_trajectory(const CommonOptions& opts) {
  const json cfg = load_config(opts.config_path);
  const json section = section_or_empty(cfg, "trajectory");
  const MacChanneld ch = scalar_channel(cfg);
  const DecodingPathd path = named_path(cfg, opts, section, "trajectory");
  const double slack = section.contains("slack") ? section.at("slack").get<double>() : 1e-3;
  const int max_iter = section.contains("max_iter") ? section.at("max_iter").get<int>() : 10000;
  const double stop_v = section.contains("stop_v") ? section.at("stop_v").get<double>() : 1e-8;
  const double floor = section.contains("mse_floor") ? section.at("mse_floor").get<double>() : 0.0;

  std::vector<DecCharacteristicd> decs;
  const auto bounds = ese_snr_bounds(ch);
  for (int k = 0; k < ch.num_users(); ++k) {
    auto dec = synthesize_matching_dec(ch, path, k);
    if (floor > 0.0) {
      const int n = 4096;
      Eigen::VectorXd rho(n), mse(n);
      for (int i = 0; i < n; ++i) {
        rho[i] = bounds.min[k] + (2.0 * bounds.max[k] - bounds.min[k]) * i / (n - 1);
        mse[i] = std::max(dec_apply(dec, rho[i]), floor);
      }
      dec = make_tabulated_dec(k, rho, mse);
    }
    decs.push_back(std::move(dec));
  }

  const auto traj = evolve(ch, decs, slack, max_iter, stop_v);
  if (resolve_output(opts, section, cfg) == "csv") {
    emit(opts, io::trajectory_to_csv(traj));
  } else {
    const Eigen::VectorXd final_mse = traj.mse.col(traj.mse.cols() - 1);
    const Eigen::VectorXd final_snr = traj.snr.col(traj.snr.cols() - 1);
    json fm = json::array(), fs = json::array();
    for (int k = 0; k < ch.num_users(); ++k) {
      fm.push_back(io::round_sig(final_mse[k]));
      fs.push_back(io::round_sig(final_snr[k]));
    }
    emit_json(opts, json{{"converged", traj.converged},
                         {"iterations_used", traj.iterations_used},
                         {"final_mse", fm},
                         {"final_snr", fs}});
  }
  if (!traj.converged) {
    std::cerr << "receiver stalled after " << traj.iterations_used << " iterations\n";
    return kExitDomain;
  }
  return kExitOk;
}

int cmd_validate_mc(const CommonOptions& opts, std::optional<long long> samples_flag) {
  const json cfg = load_config(opts.config_path);
  const json section = section_or_empty(cfg, "validate_mc");
  const MacChanneld ch = scalar_channel(cfg);
  std::uint64_t seed;
  if (opts.seed) {
    seed = *opts.seed;
  } else if (section.contains("seed")) {
    seed = section.at("seed").get<std::uint64_t>();
  } else if (cfg.contains("seed")) {
    seed = cfg.at("seed").get<std::uint64_t>();
  } else {
    throw ConfigError("validate-mc requires a seed (--seed or \"seed\" in the config)");
  }
  const long long samples =
      samples_flag ? *samples_flag
                   : (section.contains("samples") ? section.at("samples").get<long long>()
                                                  : 1000000LL);
  const json& vj = require_key(section, "v", "validate_mc.v");
  Eigen::VectorXd v(static_cast<Eigen::Index>(vj.size()));
  for (std::size_t i = 0; i < vj.size(); ++i) v[static_cast<Eigen::Index>(i)] = vj[i].get<double>();

  const auto report = monte_carlo_ese(ch, v, samples, seed);
  bool ok = true;
  for (int k = 0; k < ch.num_users(); ++k) {
    ok = ok && std::abs(report.empirical_sinr[k] - report.predicted_sinr[k]) <=
                   3.0 * report.sinr_standard_error[k];
  }
  json doc = io::mc_report_to_json(report);
  doc["within_three_sigma"] = ok;
  emit_json(opts, doc);
  if (!ok) {
    std::cerr << "empirical SINR deviates from the prediction by more than 3 sigma\n";
    return kExitDomain;
  }
  return kExitOk;
}

int cmd_mimo_rates(const CommonOptions& opts) {
  const json cfg = load_config(opts.config_path);
  const json section = section_or_empty(cfg, "mimo_rates");
  const MimoMacChanneld ch =
      io::mimo_channel_from_json(require_key(cfg, "mimo_channel", "mimo_channel"));
  const DecodingPathd path = named_path(cfg, opts, section, "mimo_rates");
  const QuadratureSpecd spec = resolve_quadrature(opts, section, cfg);
  const RateUnits units = resolve_units(opts, section, cfg);

  const RateTupled rates = convert_units(mimo_rates_along_path(ch, path, spec), units);
  if (resolve_output(opts, section, cfg) == "csv") {
    emit(opts, io::rate_tuple_to_csv(rates));
  } else {
    json doc = io::rate_tuple_to_json(rates);
    doc["sum_closed_form"] = io::round_sig(mimo_sum_rate(ch, units));
    emit_json(opts, doc);
  }
  return kExitOk;
}

int cmd_path_check(const CommonOptions& opts, std::optional<int> samples_flag) {
  const json cfg = load_config(opts.config_path);
  const json section = section_or_empty(cfg, "path_check");
  const DecodingPathd path = named_path(cfg, opts, section, "path_check");
  const int samples =
      samples_flag ? *samples_flag
                   : (section.contains("samples") ? section.at("samples").get<int>() : 1024);
  const auto report = validate_path(path, samples);
  json doc = {{"ok", report.ok}, {"message", report.message}};
  if (!report.ok) {
    const char* kind = "";
    switch (report.violation) {
      case PathValidationReport::Violation::StartPoint: kind = "start_point"; break;
      case PathValidationReport::Violation::EndPoint: kind = "end_point"; break;
      case PathValidationReport::Violation::Range: kind = "range"; break;
      case PathValidationReport::Violation::Monotonicity: kind = "monotonicity"; break;
      default: break;
    }
    doc["violation"] = {{"kind", kind}, {"t", io::round_sig(report.t)},
                        {"user", report.user + 1}};
  }
  emit_json(opts, doc);
  return report.ok ? kExitOk : kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MSE vector-field analysis of iterative multi-user detection"};
  app.require_subcommand(1);

  CommonOptions opts;
  bool region_synthesize = false;
  std::vector<double> region_target;
  std::optional<int> dec_user, dec_grid, check_samples;
  std::optional<long long> mc_samples;

  CLI::App* rates = app.add_subcommand("rates", "per-user and sum rates along a path");
  add_common_flags(rates, opts);

  CLI::App* region = app.add_subcommand("region", "capacity-region constraints and feasibility");
  add_common_flags(region, opts);
  region->add_flag("--synthesize", region_synthesize,
                   "construct a path achieving the target tuple");
  region->add_option("--target", region_target, "target rate tuple (overrides the config)");

  CLI::App* dec = app.add_subcommand("dec-curve", "matched decoder curve for one user");
  add_common_flags(dec, opts);
  dec->add_option("--user", dec_user, "1-based user index");
  dec->add_option("--grid", dec_grid, "number of grid points");

  CLI::App* traj = app.add_subcommand("trajectory", "iterative receiver evolution");
  add_common_flags(traj, opts);

  CLI::App* mc = app.add_subcommand("validate-mc", "Monte Carlo check of the SNR model");
  add_common_flags(mc, opts);
  mc->add_option("--samples", mc_samples, "number of Monte Carlo samples");

  CLI::App* mimo = app.add_subcommand("mimo-rates", "per-user rates for a MIMO channel");
  add_common_flags(mimo, opts);

  CLI::App* check = app.add_subcommand("path-check", "validate a decoding path");
  add_common_flags(check, opts);
  check->add_option("--samples", check_samples, "validation grid size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (rates->parsed()) return cmd_rates(opts);
    if (region->parsed()) return cmd_region(opts, region_synthesize, region_target);
    if (dec->parsed()) return cmd_dec_curve(opts, dec_user, dec_grid);
    if (traj->parsed()) return cmd_trajectory(opts);
    if (mc->parsed()) return cmd_validate_mc(opts, mc_samples);
    if (mimo->parsed()) return cmd_mimo_rates(opts);
    if (check->parsed()) return cmd_path_check(opts, check_samples);
  } catch (const InfeasibleTargetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const OffSumRateFaceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const NonMonotoneSnrError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
