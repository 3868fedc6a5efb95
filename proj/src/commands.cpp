#include "gdrisk/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "gdrisk/bounds.hpp"
#include "gdrisk/csv.hpp"
#include "gdrisk/errors.hpp"
#include "gdrisk/montecarlo.hpp"
#include "gdrisk/numerics.hpp"
#include "gdrisk/spectrum.hpp"
#include "gdrisk/trajectory.hpp"
#include "gdrisk/verify.hpp"

namespace gdrisk {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kValidFamilies =
    "inv_poly, inv_log_poly, constant, piecewise_constant, explicit";

// Builds the spectrum named by `section` of the config for sample size n.
// The ambient dimension comes from `p` unless the family derives its own
// length from n.
Spectrum spectrum_from_config(const Config& cfg, const std::string& section, Index n, Index p) {
  const std::string family = cfg.get_string(section, "family", "inv_poly");
  if (family == "inv_poly") {
    return Spectrum::inverse_polynomial(cfg.get_double(section, "alpha", 2.0), p);
  }
  if (family == "inv_log_poly") {
    return Spectrum::inverse_log_polynomial(cfg.get_double(section, "beta", 2.0), p);
  }
  if (family == "constant") {
    return Spectrum::constant_block(cfg.get_double(section, "epsilon", 0.5), n);
  }
  if (family == "piecewise_constant") {
    return Spectrum::piecewise_constant(cfg.get_double(section, "r", 0.5),
                                        cfg.get_double(section, "q", 2.0), n);
  }
  if (family == "explicit") {
    return Spectrum::explicit_values(cfg.get_double_list(section, "values"));
  }
  throw ConfigError("unknown spectrum family '" + family + "'; valid families: " +
                    std::string(kValidFamilies));
}

// "inv_poly:2" or "piecewise_constant:0.5:2" from family list entries.
Spectrum spectrum_from_tag(const std::string& tag, Index n, Index p) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= tag.size()) {
    const std::size_t colon = tag.find(':', start);
    if (colon == std::string::npos) {
      parts.push_back(tag.substr(start));
      break;
    }
    parts.push_back(tag.substr(start, colon - start));
    start = colon + 1;
  }
  const std::string& family = parts[0];
  const auto param = [&](std::size_t i, double fallback) {
    return parts.size() > i ? std::stod(parts[i]) : fallback;
  };
  if (family == "inv_poly") return Spectrum::inverse_polynomial(param(1, 2.0), p);
  if (family == "inv_log_poly") return Spectrum::inverse_log_polynomial(param(1, 2.0), p);
  if (family == "constant") return Spectrum::constant_block(param(1, 0.5), n);
  if (family == "piecewise_constant") {
    return Spectrum::piecewise_constant(param(1, 0.5), param(2, 2.0), n);
  }
  throw ConfigError("unknown spectrum family '" + family + "'; valid families: " +
                    std::string(kValidFamilies));
}

FeatureLaw feature_law_from(const std::string& name) {
  if (name == "gaussian") return FeatureLaw::kGaussian;
  if (name == "rademacher") return FeatureLaw::kRademacher;
  throw ConfigError("unknown feature law '" + name + "'; use gaussian or rademacher");
}

ThetaMode theta_mode_from(const std::string& name) {
  if (name == "decay") return ThetaMode::kDecay;
  if (name == "e1") return ThetaMode::kFirstBasis;
  if (name == "random_iso") return ThetaMode::kRandomIso;
  throw ConfigError("unknown theta_star_mode '" + name + "'; use decay, e1 or random_iso");
}

Quantity quantity_from(const std::string& name) {
  if (name == "optimal_risk") return Quantity::kOptimalRisk;
  if (name == "min_norm_risk") return Quantity::kMinNormRisk;
  if (name == "argmin_t") return Quantity::kArgminT;
  if (name == "full_curve") return Quantity::kFullCurve;
  throw ConfigError("unknown quantity '" + name +
                    "'; use optimal_risk, min_norm_risk, argmin_t or full_curve");
}

TrajectoryConfig trajectory_from_config(const Config& cfg, const Spectrum& spectrum, Index n) {
  TrajectoryConfig traj;
  const double stability_c = cfg.get_double("trajectory", "stability_c", 2.0);
  traj.learning_rate = cfg.has("trajectory", "lr")
                           ? cfg.get_double("trajectory", "lr")
                           : default_learning_rate(spectrum, stability_c);
  if (cfg.has("trajectory", "t_grid")) {
    traj.t_grid = cfg.get_int_list("trajectory", "t_grid");  // explicit epoch list
  } else {
    const int ppd = static_cast<int>(cfg.get_int("trajectory", "points_per_decade", 20));
    Index t_max;
    if (cfg.has("trajectory", "t_max")) {
      t_max = cfg.get_int("trajectory", "t_max");
    } else {
      const double factor = cfg.get_double("trajectory", "t_max_factor", 100.0);
      t_max =
          static_cast<Index>(std::llround(factor * static_cast<double>(n) / traj.learning_rate));
    }
    traj.t_grid = geometric_epoch_grid(t_max, ppd);
  }
  traj.include_decomposition = cfg.get_bool("trajectory", "decomposition", false);
  traj.validate(spectrum, stability_c);
  return traj;
}

ExperimentPlan plan_from_config(const Config& cfg, const RunConfig& rc) {
  ExperimentPlan plan;
  plan.n = cfg.get_int("instance", "n", 100);
  plan.p = cfg.get_int("instance", "p", 1000);
  plan.spectrum = spectrum_from_config(cfg, "instance", plan.n, plan.p);
  if (!plan.spectrum.finite()) throw ConfigError("instance: spectrum must be finite for sampling");
  plan.p = plan.spectrum.dim();  // n-derived families fix their own length
  plan.noise_sigma = cfg.get_double("instance", "noise_sigma", 1.0);
  plan.theta_mode = theta_mode_from(cfg.get_string("instance", "theta_star_mode", "decay"));
  plan.theta_norm = cfg.get_double("instance", "theta_star_norm", 1.0);
  plan.feature_law = feature_law_from(cfg.get_string("instance", "feature_law", "gaussian"));
  plan.master_seed = rc.seed ? *rc.seed : cfg.get_uint64("instance", "master_seed", 20240601);
  plan.trials = static_cast<int>(cfg.get_int("experiment", "trials", 100));
  plan.trajectory = trajectory_from_config(cfg, plan.spectrum, plan.n);
  if (cfg.has("experiment", "quantities")) {
    for (const std::string& q : cfg.get_string_list("experiment", "quantities")) {
      plan.quantities.push_back(quantity_from(q));
    }
  } else {
    plan.quantities = {Quantity::kOptimalRisk, Quantity::kMinNormRisk, Quantity::kArgminT,
                       Quantity::kFullCurve};
  }
  return plan;
}

int resolve_threads(const RunConfig& rc) {
  if (rc.threads > 0) return rc.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

fs::path ensure_out_dir(const RunConfig& rc) {
  fs::path dir = rc.output_dir.empty() ? fs::path(".") : fs::path(rc.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file " + path.string());
  return out;
}

json summary_json(const Summary& s) {
  return json{{"mean", s.mean}, {"ci_half_width", s.ci_half_width}, {"trials", s.trials}};
}

// ---------------------------------------------------------------------------

int cmd_spectrum(const Config& cfg, const RunConfig& rc) {
  const fs::path out_dir = ensure_out_dir(rc);
  const std::vector<Index> n_grid = cfg.has("spectrum", "n_grid")
                                        ? cfg.get_int_list("spectrum", "n_grid")
                                        : std::vector<Index>{100, 316, 1000, 3162, 10000};
  const double c0 = cfg.get_double("spectrum", "c0", 1.0);
  const double c1 = cfg.get_double("spectrum", "c1", 1.0);
  const Index p = cfg.get_int("spectrum", "p", Spectrum::kInfinite);

  const auto family_at = [&](Index n) { return spectrum_from_config(cfg, "spectrum", n, p); };
  const std::vector<RateRow> rows = rate_table(family_at, n_grid, c0, c1);

  // One fitted log-log order for the whole grid; undefined when the grid is
  // a single point or k1 vanishes somewhere (the constant family).
  bool fit_defined = rows.size() >= 2 && std::all_of(rows.begin(), rows.end(),
                                                     [](const RateRow& r) { return r.k1 > 0; });
  double k1_order = 0.0;
  if (fit_defined) {
    std::vector<double> ns, k1s;
    for (const RateRow& row : rows) {
      ns.push_back(static_cast<double>(row.n));
      k1s.push_back(static_cast<double>(row.k1));
    }
    k1_order = log_log_slope(ns, k1s);
  }

  const std::string tag = family_at(n_grid.front()).id();
  auto csv_out = open_out(out_dir / ("rates_" + tag + ".csv"));
  CsvWriter csv(csv_out);
  csv.header({"n", "k0", "k1", "r_sigma", "k1_fitted_order"});
  for (const RateRow& row : rows) {
    csv.row({row.n, row.k0, row.k1, row.r_sigma,
             fit_defined ? format_double(k1_order) : std::string()});
  }

  json summary;
  summary["spectrum"] = tag;
  summary["c0"] = c0;
  summary["c1"] = c1;
  if (fit_defined) {
    summary["k1_loglog_slope"] = k1_order;
  } else {
    summary["k1_loglog_slope"] = nullptr;
    summary["note"] = rows.size() < 2 ? "insufficient points for a fitted order"
                                      : "k1 vanishes somewhere on the grid";
  }
  open_out(out_dir / ("rates_" + tag + ".json")) << summary.dump(2) << '\n';
  std::cout << "wrote rates for " << tag << " over " << rows.size() << " sample sizes\n";
  return kExitOk;
}

int cmd_trajectory(const Config& cfg, const RunConfig& rc) {
  fs::path out_dir = ensure_out_dir(rc);
  out_dir /= cfg.get_string("experiment", "name", "run");
  fs::create_directories(out_dir);
  ExperimentPlan plan = plan_from_config(cfg, rc);
  if (plan.quantities.empty()) {
    plan.quantities = {Quantity::kOptimalRisk, Quantity::kMinNormRisk, Quantity::kArgminT,
                       Quantity::kFullCurve};
  }
  if (std::find(plan.quantities.begin(), plan.quantities.end(), Quantity::kFullCurve) ==
      plan.quantities.end()) {
    plan.quantities.push_back(Quantity::kFullCurve);
  }

  const ExperimentResult result = run_experiment(plan, resolve_threads(rc));

  const std::string stem =
      plan.spectrum.id() + "_n" + std::to_string(plan.n) + "_p" + std::to_string(plan.p);
  auto csv_out = open_out(out_dir / ("curve_" + stem + ".csv"));
  CsvWriter csv(csv_out);
  csv.header({"t", "mean_risk", "ci_half_width"});
  for (std::size_t i = 0; i < result.t_grid.size(); ++i) {
    csv.row({result.t_grid[i], result.curve[i].mean, result.curve[i].ci_half_width});
  }

  if (plan.trials == 1 && plan.trajectory.include_decomposition) {
    const ProblemInstance inst = plan.make_instance();
    const SampledDataset ds = sample_dataset(inst, trial_seed(plan.master_seed, 0));
    const RiskTrajectory traj = risk_trajectory(ds, inst.spectrum, inst.theta_star, plan.trajectory);
    auto single_out = open_out(out_dir / ("trajectory_" + stem + ".csv"));
    CsvWriter single(single_out);
    single.header({"t", "risk", "bias_part", "variance_part"});
    for (std::size_t i = 0; i < traj.t_grid.size(); ++i) {
      single.row({traj.t_grid[i], traj.risk[i], traj.bias_part[i], traj.variance_part[i]});
    }
  }

  json summary;
  summary["spectrum"] = plan.spectrum.id();
  summary["n"] = plan.n;
  summary["p"] = plan.p;
  summary["trials"] = plan.trials;
  summary["learning_rate"] = plan.trajectory.learning_rate;
  summary["master_seed"] = plan.master_seed;
  if (result.optimal_risk) summary["optimal_risk"] = summary_json(*result.optimal_risk);
  if (result.min_norm_risk) summary["min_norm_risk"] = summary_json(*result.min_norm_risk);
  if (result.argmin_t) summary["argmin_t"] = summary_json(*result.argmin_t);
  open_out(out_dir / ("summary_" + stem + ".json")) << summary.dump(2) << '\n';
  std::cout << "wrote mean risk curve for " << stem << " (" << plan.trials << " trials)\n";
  return kExitOk;
}

int cmd_bounds(const Config& cfg, const RunConfig& rc) {
  const fs::path out_dir = ensure_out_dir(rc);
  const std::vector<Index> n_grid = cfg.has("bounds", "n_grid")
                                        ? cfg.get_int_list("bounds", "n_grid")
                                        : std::vector<Index>{100, 316, 1000, 3162, 10000};
  BoundParams params;
  params.delta = cfg.get_double("bounds", "delta", 0.05);
  params.sigma_y = cfg.get_double("bounds", "sigma_y", 1.0);
  params.theta_norm = cfg.get_double("bounds", "theta_norm", 1.0);
  params.c2 = cfg.get_double("bounds", "c2", 1.0);

  CtnStrategy ctn = CtnStrategy::constant(1.0);
  const std::string ctn_text = cfg.get_string("bounds", "ctn", "constant:1");
  const auto colon = ctn_text.find(':');
  const std::string ctn_kind = ctn_text.substr(0, colon);
  const double ctn_value = colon == std::string::npos ? 1.0 : std::stod(ctn_text.substr(colon + 1));
  if (ctn_kind == "constant") {
    ctn = CtnStrategy::constant(ctn_value);
  } else if (ctn_kind == "power") {
    ctn = CtnStrategy::power_law(ctn_value);
  } else {
    throw ConfigError("unknown c(t,n) strategy '" + ctn_kind + "'; use constant:V or power:B");
  }

  const Index p = cfg.get_int("bounds", "p", Spectrum::kInfinite);
  const auto family_at = [&](Index n) { return spectrum_from_config(cfg, "bounds", n, p); };

  json table;
  std::vector<double> ns, mins, bartletts, zous;
  for (Index n : n_grid) {
    const Spectrum spectrum = family_at(n);
    const double lr = cfg.has("bounds", "lr") ? cfg.get_double("bounds", "lr")
                                              : default_learning_rate(spectrum);
    const std::vector<Index> grid_all = geometric_epoch_grid(50 * n, 20);
    const std::vector<Index> t_grid(grid_all.begin() + 1, grid_all.end());  // t >= 1

    const BoundReport report = make_bound_report(spectrum, n, lr, t_grid, ctn, params);
    auto csv_out =
        open_out(out_dir / ("bounds_" + spectrum.id() + "_n" + std::to_string(n) + ".csv"));
    CsvWriter csv(csv_out);
    csv.header({"t", "bias_bound", "variance_bound", "total_bound", "k2"});
    for (const BoundCurvePoint& point : report.curve) {
      csv.row({point.t, point.bias, point.variance, point.total, point.k2});
    }

    const MinBoundResult min_res = min_bound_over_t(spectrum, n, lr, t_grid, ctn, params);
    ns.push_back(static_cast<double>(n));
    mins.push_back(min_res.min_total);
    bartletts.push_back(report.bartlett_bound);
    zous.push_back(report.zou_bound);
  }

  table["n_grid"] = ns;
  table["min_total_bound"] = mins;
  table["bartlett_bound"] = bartletts;
  table["zou_bound"] = zous;
  if (ns.size() >= 2) {
    table["slopes"] = {{"ours", log_log_slope(ns, mins)},
                       {"bartlett", log_log_slope(ns, bartletts)},
                       {"zou", log_log_slope(ns, zous)}};
  }
  open_out(out_dir / "bound_rates.json") << table.dump(2) << '\n';
  std::cout << "wrote bound curves for " << n_grid.size() << " sample sizes\n";
  return kExitOk;
}

int cmd_table(const Config& cfg, const RunConfig& rc) {
  const fs::path out_dir = ensure_out_dir(rc);
  const Index n = cfg.get_int("table", "n", 100);
  const Index p = cfg.get_int("table", "p", 1000);
  const std::vector<std::string> tags =
      cfg.has("table", "families")
          ? cfg.get_string_list("table", "families")
          : std::vector<std::string>{"inv_poly:1", "inv_poly:2", "inv_poly:3",
                                     "inv_log_poly:1", "inv_log_poly:2", "inv_log_poly:3"};

  std::vector<ExperimentPlan> plans;
  for (const std::string& tag : tags) {
    ExperimentPlan plan;
    plan.spectrum = spectrum_from_tag(tag, n, p);
    plan.n = n;
    plan.p = plan.spectrum.dim();
    plan.noise_sigma = cfg.get_double("instance", "noise_sigma", 1.0);
    plan.theta_mode = theta_mode_from(cfg.get_string("instance", "theta_star_mode", "decay"));
    plan.theta_norm = cfg.get_double("instance", "theta_star_norm", 1.0);
    plan.feature_law = feature_law_from(cfg.get_string("instance", "feature_law", "gaussian"));
    plan.master_seed = rc.seed ? *rc.seed : cfg.get_uint64("instance", "master_seed", 20240601);
    plan.trials = static_cast<int>(cfg.get_int("table", "trials", 1000));
    plan.trajectory.learning_rate = default_learning_rate(plan.spectrum);
    const Index t_max = static_cast<Index>(
        std::llround(100.0 * static_cast<double>(n) / plan.trajectory.learning_rate));
    plan.trajectory.t_grid = geometric_epoch_grid(t_max, 20);
    plan.quantities = {Quantity::kOptimalRisk, Quantity::kMinNormRisk};
    plans.push_back(std::move(plan));
  }

  const Table table = table_report(plans, resolve_threads(rc));
  fs::path table_dir = out_dir / cfg.get_string("experiment", "name", "table");
  fs::create_directories(table_dir);
  open_out(table_dir / ("table_n" + std::to_string(n) + "_p" + std::to_string(p) + ".csv"))
      << table.to_csv();
  open_out(table_dir / ("table_n" + std::to_string(n) + "_p" + std::to_string(p) + ".txt"))
      << table.to_text();
  std::cout << table.to_text();
  return kExitOk;
}

int cmd_scan(const Config& cfg, const RunConfig& rc) {
  const fs::path out_dir = ensure_out_dir(rc);
  const std::vector<Index> n_grid = cfg.has("scan", "n_grid")
                                        ? cfg.get_int_list("scan", "n_grid")
                                        : std::vector<Index>{50, 100, 200};
  const double p_factor = cfg.get_double("scan", "p_factor", 10.0);
  const int trials = static_cast<int>(cfg.get_int("scan", "trials", 50));
  const double threshold = cfg.get_double("scan", "threshold");

  std::vector<MeanCurve> curves;
  for (Index n : n_grid) {
    const Index p = static_cast<Index>(std::llround(p_factor * static_cast<double>(n)));
    ExperimentPlan plan;
    plan.spectrum = spectrum_from_config(cfg, "scan", n, p);
    plan.n = n;
    plan.p = plan.spectrum.dim();
    plan.noise_sigma = cfg.get_double("instance", "noise_sigma", 1.0);
    plan.theta_mode = theta_mode_from(cfg.get_string("instance", "theta_star_mode", "decay"));
    plan.theta_norm = cfg.get_double("instance", "theta_star_norm", 1.0);
    plan.feature_law = feature_law_from(cfg.get_string("instance", "feature_law", "gaussian"));
    plan.master_seed = rc.seed ? *rc.seed : cfg.get_uint64("instance", "master_seed", 20240601);
    plan.trials = trials;
    plan.trajectory.learning_rate = default_learning_rate(plan.spectrum);
    const Index t_max = static_cast<Index>(
        std::llround(100.0 * static_cast<double>(n) / plan.trajectory.learning_rate));
    plan.trajectory.t_grid = geometric_epoch_grid(t_max, 20);
    plan.quantities = {Quantity::kFullCurve};

    const ExperimentResult result = run_experiment(plan, resolve_threads(rc));
    MeanCurve curve;
    curve.n = n;
    curve.learning_rate = plan.trajectory.learning_rate;
    curve.t_grid = result.t_grid;
    for (const Summary& s : result.curve) curve.mean_risk.push_back(s.mean);
    curves.push_back(std::move(curve));
  }

  const std::vector<RegionInterval> intervals = region_scan(curves, threshold);
  auto csv_out = open_out(out_dir / "scan.csv");
  CsvWriter csv(csv_out);
  csv.header({"n", "empty", "t_lo", "t_hi", "t_lo_times_lr", "t_hi_lr_over_n"});
  for (const RegionInterval& iv : intervals) {
    csv.row({iv.n, std::int64_t(iv.empty ? 1 : 0), iv.t_lo, iv.t_hi, iv.lo_times_lr,
             iv.hi_lr_over_n});
  }
  std::cout << "wrote low-risk regions for " << intervals.size() << " sample sizes\n";
  return kExitOk;
}

int cmd_verify(const Config& cfg, const RunConfig& rc) {
  VerifyOptions options;
  options.master_seed = rc.seed ? *rc.seed : cfg.get_uint64("verify", "master_seed", 8675309);
  options.lr_scale = cfg.get_double("verify", "lr_scale", 1.0);
  if (cfg.has("verify", "checks")) options.checks = cfg.get_string_list("verify", "checks");

  if (cfg.has("verify", "checks") && options.checks.empty()) {
    std::cout << "warning: 0 checks requested, nothing to verify\n";
    return kExitOk;
  }

  const std::vector<CheckResult> results = run_verification(options);
  bool all_passed = true;
  for (const CheckResult& res : results) {
    all_passed = all_passed && res.passed;
    std::cout << (res.passed ? "[PASS] " : "[FAIL] ") << res.name
              << "  tolerance=" << format_double(res.tolerance)
              << "  observed=" << format_double(res.observed);
    if (!res.detail.empty()) std::cout << "  (" << res.detail << ")";
    std::cout << '\n';
  }
  std::cout << (all_passed ? "verification passed" : "verification FAILED") << " ("
            << results.size() << " checks)\n";
  return all_passed ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int run_command(const RunConfig& rc) {
  try {
    Config cfg;
    if (!rc.config_path.empty()) cfg = Config::load_file(rc.config_path);
    for (const std::string& assignment : rc.overrides) cfg.apply_override(assignment);

    if (rc.command == "spectrum") return cmd_spectrum(cfg, rc);
    if (rc.command == "trajectory") return cmd_trajectory(cfg, rc);
    if (rc.command == "bounds") return cmd_bounds(cfg, rc);
    if (rc.command == "table") return cmd_table(cfg, rc);
    if (rc.command == "scan") return cmd_scan(cfg, rc);
    if (rc.command == "verify") return cmd_verify(cfg, rc);
    throw ConfigError("unknown command '" + rc.command + "'");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const StabilityError& e) {
    std::cerr << "stability error: " << e.what() << '\n';
    return kExitNumericError;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumericError;
  }
}

}  // namespace gdrisk
