#include "gdrisk/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "gdrisk/errors.hpp"
#include "gdrisk/numerics.hpp"
#include "gdrisk/rng.hpp"

namespace gdrisk {

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  std::uint64_t st = master_seed;
  const std::uint64_t a = splitmix64_next(st);
  st ^= 0x9e3779b97f4a7c15ULL * (trial_index + 1);
  return a ^ splitmix64_next(st);
}

ProblemInstance ExperimentPlan::make_instance() const {
  ProblemInstance inst;
  inst.spectrum = spectrum;
  inst.n = n;
  inst.p = p;
  inst.noise_sigma = noise_sigma;
  inst.feature_law = feature_law;
  if (theta_star_override) {
    inst.theta_star = *theta_star_override;
    return inst;
  }
  switch (theta_mode) {
    case ThetaMode::kDecay:
      inst.theta_star = theta_norm * default_theta_star(p);
      break;
    case ThetaMode::kFirstBasis:
      inst.theta_star = theta_norm * basis_theta_star(p);
      break;
    case ThetaMode::kRandomIso:
      inst.theta_star = random_theta_star(p, theta_norm, master_seed);
      break;
  }
  return inst;
}

void ExperimentPlan::validate() const {
  if (trials < 1) throw ConfigError("experiment: trials must be >= 1");
  if (quantities.empty()) throw ConfigError("experiment: quantity set must be non-empty");
  make_instance().validate();
  trajectory.validate(spectrum);
}

namespace {

bool wants(const ExperimentPlan& plan, Quantity q) {
  return std::find(plan.quantities.begin(), plan.quantities.end(), q) != plan.quantities.end();
}

struct TrialOutcome {
  double optimal_risk = 0.0;
  double min_norm_risk = 0.0;
  double argmin_t = 0.0;
  std::vector<double> curve;
  std::string error;  // non-empty marks a failed trial
};

Summary summarize(std::span<const double> values) {
  Summary s;
  s.trials = static_cast<int>(values.size());
  s.mean = mean_of(values);
  if (values.size() > 1) {
    s.ci_half_width = 1.96 * sample_sd(values) / std::sqrt(static_cast<double>(values.size()));
  }
  return s;
}

// Index-based parallel loop; trial order never affects results because each
// body call touches only its own slot.
template <class Body>
void parallel_trials(int trials, int threads, Body&& body) {
  const int workers = std::max(1, std::min(threads, trials));
  if (workers == 1) {
    for (int i = 0; i < trials; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < trials; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan, int threads) {
  plan.validate();
  const ProblemInstance inst = plan.make_instance();
  const bool want_curve = wants(plan, Quantity::kFullCurve);

  std::vector<TrialOutcome> outcomes(plan.trials);
  parallel_trials(plan.trials, threads, [&](int i) {
    TrialOutcome& out = outcomes[static_cast<std::size_t>(i)];
    try {
      const std::uint64_t seed = trial_seed(plan.master_seed, static_cast<std::uint64_t>(i));
      const SampledDataset ds = sample_dataset(inst, seed);
      const RiskTrajectory traj = risk_trajectory(ds, inst.spectrum, inst.theta_star, plan.trajectory);
      out.optimal_risk = traj.min_risk;
      out.min_norm_risk = traj.min_norm_risk;
      out.argmin_t = static_cast<double>(traj.argmin_t);
      if (want_curve) out.curve = traj.risk;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  std::string failures;
  for (const TrialOutcome& out : outcomes) {
    if (!out.error.empty()) {
      if (!failures.empty()) failures += "; ";
      failures += out.error;
    }
  }
  if (!failures.empty()) {
    throw RankDeficientError("experiment aborted, failing trials: " + failures);
  }

  ExperimentResult result;
  std::vector<double> column(outcomes.size());
  const auto collect = [&](auto member) {
    for (std::size_t i = 0; i < outcomes.size(); ++i) column[i] = outcomes[i].*member;
    return summarize(column);
  };

  if (wants(plan, Quantity::kOptimalRisk)) result.optimal_risk = collect(&TrialOutcome::optimal_risk);
  if (wants(plan, Quantity::kMinNormRisk)) result.min_norm_risk = collect(&TrialOutcome::min_norm_risk);
  if (wants(plan, Quantity::kArgminT)) result.argmin_t = collect(&TrialOutcome::argmin_t);

  if (want_curve) {
    result.t_grid = plan.trajectory.t_grid;
    result.curve.resize(result.t_grid.size());
    for (std::size_t e = 0; e < result.t_grid.size(); ++e) {
      for (std::size_t i = 0; i < outcomes.size(); ++i) column[i] = outcomes[i].curve[e];
      result.curve[e] = summarize(column);
    }
  }
  return result;
}

namespace {

std::string format_value(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::string Table::to_text() const {
  std::size_t name_width = 12;
  for (const TableRow& row : rows) name_width = std::max(name_width, row.spectrum_id.size());

  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-*s  %6s  %19s  %19s\n", static_cast<int>(name_width),
                "spectrum", "k1", "optimal risk", "min-norm risk");
  os << buf;
  for (const TableRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%-*s  %6lld  %9s ± %-7s  %9s ± %-7s\n",
                  static_cast<int>(name_width), row.spectrum_id.c_str(),
                  static_cast<long long>(row.k1), format_value(row.optimal_risk.mean).c_str(),
                  format_value(row.optimal_risk.ci_half_width).c_str(),
                  format_value(row.min_norm_risk.mean).c_str(),
                  format_value(row.min_norm_risk.ci_half_width).c_str());
    os << buf;
  }
  return os.str();
}

std::string Table::to_csv() const {
  std::ostringstream os;
  os << "spectrum,k1,optimal_risk,optimal_risk_ci,min_norm_risk,min_norm_risk_ci,trials\n";
  for (const TableRow& row : rows) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%lld,%.17g,%.17g,%.17g,%.17g,%d\n",
                  row.spectrum_id.c_str(), static_cast<long long>(row.k1),
                  row.optimal_risk.mean, row.optimal_risk.ci_half_width,
                  row.min_norm_risk.mean, row.min_norm_risk.ci_half_width,
                  row.optimal_risk.trials);
    os << buf;
  }
  return os.str();
}

Table table_report(std::span<const ExperimentPlan> plans, int threads) {
  Table table;
  if (plans.empty()) return table;

  for (const ExperimentPlan& plan : plans) {
    if (plan.n != plans.front().n || plan.p != plans.front().p) {
      throw ConfigError("table: all rows must share the same n and p");
    }
  }

  for (const ExperimentPlan& plan : plans) {
    ExperimentPlan row_plan = plan;
    row_plan.quantities = {Quantity::kOptimalRisk, Quantity::kMinNormRisk};
    const ExperimentResult res = run_experiment(row_plan, threads);

    TableRow row;
    row.spectrum_id = plan.spectrum.id();
    row.k1 = effective_dims(plan.spectrum, plan.n).k1;
    row.optimal_risk = *res.optimal_risk;
    row.min_norm_risk = *res.min_norm_risk;
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace gdrisk
