#include <doctest.h>

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "gdrisk/errors.hpp"
#include "gdrisk/montecarlo.hpp"
#include "gdrisk/numerics.hpp"
#include "gdrisk/trajectory.hpp"

using namespace gdrisk;

namespace {

ExperimentPlan base_plan(Index n, Index p, int trials, std::uint64_t seed) {
  ExperimentPlan plan;
  plan.spectrum = Spectrum::inverse_polynomial(2.0, p);
  plan.n = n;
  plan.p = p;
  plan.master_seed = seed;
  plan.trials = trials;
  plan.trajectory.learning_rate = default_learning_rate(plan.spectrum);
  const Index t_max = static_cast<Index>(
      std::llround(100.0 * static_cast<double>(n) / plan.trajectory.learning_rate));
  plan.trajectory.t_grid = geometric_epoch_grid(t_max, 10);
  plan.quantities = {Quantity::kOptimalRisk, Quantity::kMinNormRisk, Quantity::kArgminT,
                     Quantity::kFullCurve};
  return plan;
}

bool results_identical(const ExperimentResult& a, const ExperimentResult& b) {
  if (a.optimal_risk->mean != b.optimal_risk->mean) return false;
  if (a.optimal_risk->ci_half_width != b.optimal_risk->ci_half_width) return false;
  if (a.min_norm_risk->mean != b.min_norm_risk->mean) return false;
  if (a.argmin_t->mean != b.argmin_t->mean) return false;
  if (a.curve.size() != b.curve.size()) return false;
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    if (a.curve[i].mean != b.curve[i].mean) return false;
    if (a.curve[i].ci_half_width != b.curve[i].ci_half_width) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("plan validation") {
  ExperimentPlan plan = base_plan(10, 30, 4, 1);
  CHECK_NOTHROW(plan.validate());

  ExperimentPlan no_trials = plan;
  no_trials.trials = 0;
  CHECK_THROWS_AS(no_trials.validate(), ConfigError);

  ExperimentPlan no_quantities = plan;
  no_quantities.quantities.clear();
  CHECK_THROWS_AS(no_quantities.validate(), ConfigError);
}

TEST_CASE("single trial: mean is the trial, interval collapses") {
  const ExperimentPlan plan = base_plan(10, 30, 1, 7);
  const ExperimentResult res = run_experiment(plan, 1);
  REQUIRE(res.optimal_risk.has_value());
  CHECK(res.optimal_risk->trials == 1);
  CHECK(res.optimal_risk->ci_half_width == 0.0);
  CHECK(res.optimal_risk->mean > 0.0);
  CHECK(res.min_norm_risk->mean >= res.optimal_risk->mean);
}

TEST_CASE("results are identical across worker counts") {
  const ExperimentPlan plan = base_plan(16, 48, 40, 99);
  const ExperimentResult serial = run_experiment(plan, 1);
  const ExperimentResult threaded = run_experiment(plan, 3);
  const ExperimentResult oversubscribed = run_experiment(plan, 8);
  CHECK(results_identical(serial, threaded));
  CHECK(results_identical(serial, oversubscribed));
}

TEST_CASE("noiseless realizable target: optimal risk is optimization residual") {
  const Index n = 20, p = 60;
  ExperimentPlan probe = base_plan(n, p, 1, 31);
  probe.noise_sigma = 0.0;

  // Project the target onto the row space of trial 0's design, then rerun
  // with that as the truth: gradient descent can now reach it exactly.
  const SampledDataset ds = sample_dataset(probe.make_instance(), trial_seed(31, 0));
  const Eigen::VectorXd projected =
      ds.svd.w * (ds.svd.w.transpose() * probe.make_instance().theta_star);

  ExperimentPlan plan = probe;
  plan.theta_star_override = projected;
  plan.trajectory.t_grid = geometric_epoch_grid(400000, 10);
  const ExperimentResult res = run_experiment(plan, 1);
  CHECK(res.optimal_risk->mean <= 1e-8);
}

TEST_CASE("confidence interval shrinks like the square root of the trial count") {
  double ratio_sum = 0.0;
  const int reps = 5;
  for (int rep = 0; rep < reps; ++rep) {
    const std::uint64_t seed = 1000 + 17 * static_cast<std::uint64_t>(rep);
    ExperimentPlan small = base_plan(12, 30, 60, seed);
    ExperimentPlan big = base_plan(12, 30, 240, seed);
    small.quantities = {Quantity::kOptimalRisk};
    big.quantities = {Quantity::kOptimalRisk};
    const double hw_small = run_experiment(small, 2).optimal_risk->ci_half_width;
    const double hw_big = run_experiment(big, 2).optimal_risk->ci_half_width;
    ratio_sum += hw_big / hw_small;
  }
  const double mean_ratio = ratio_sum / reps;
  CHECK(std::abs(mean_ratio - 0.5) < 0.125);
}

TEST_CASE("rank-deficient trials abort with the offending seed") {
  // ±1 features in a nearly square design collide with decent probability,
  // producing linearly dependent rows.
  bool aborted = false;
  for (std::uint64_t master = 0; master < 60 && !aborted; ++master) {
    ExperimentPlan plan = base_plan(8, 9, 40, master);
    plan.feature_law = FeatureLaw::kRademacher;
    plan.quantities = {Quantity::kOptimalRisk};
    plan.trajectory.t_grid = {0, 1, 2};
    try {
      run_experiment(plan, 2);
    } catch (const RankDeficientError& e) {
      aborted = true;
      CHECK(std::string(e.what()).find("seed") != std::string::npos);
    }
  }
  CHECK(aborted);
}

TEST_CASE("optimal risk ordering across decay speeds") {
  std::vector<double> means;
  for (double alpha : {1.0, 2.0, 3.0}) {
    ExperimentPlan plan = base_plan(100, 1000, 40, 4242);
    plan.spectrum = Spectrum::inverse_polynomial(alpha, 1000);
    plan.trajectory.learning_rate = default_learning_rate(plan.spectrum);
    const Index t_max = static_cast<Index>(
        std::llround(100.0 * 100.0 / plan.trajectory.learning_rate));
    plan.trajectory.t_grid = geometric_epoch_grid(t_max, 10);
    plan.quantities = {Quantity::kOptimalRisk, Quantity::kMinNormRisk};
    const ExperimentResult res = run_experiment(plan, 2);
    means.push_back(res.optimal_risk->mean);
    CHECK(res.min_norm_risk->mean > res.optimal_risk->mean);
  }
  CHECK(means[0] > means[1]);
  CHECK(means[1] > means[2]);
}

TEST_CASE("table report") {
  CHECK(table_report({}).rows.empty());

  const Index n = 50, p = 250;
  std::vector<ExperimentPlan> plans;
  for (double alpha : {1.0, 2.0, 3.0}) {
    ExperimentPlan plan = base_plan(n, p, 3, 5);
    plan.spectrum = Spectrum::inverse_polynomial(alpha, p);
    plan.trajectory.learning_rate = default_learning_rate(plan.spectrum);
    plan.trajectory.t_grid = geometric_epoch_grid(4000, 10);
    plans.push_back(plan);
  }
  for (double beta : {1.0, 2.0, 3.0}) {
    ExperimentPlan plan = base_plan(n, p, 3, 5);
    plan.spectrum = Spectrum::inverse_log_polynomial(beta, p);
    plan.trajectory.learning_rate = default_learning_rate(plan.spectrum);
    plan.trajectory.t_grid = geometric_epoch_grid(4000, 10);
    plans.push_back(plan);
  }

  const Table table = table_report(plans, 2);
  REQUIRE(table.rows.size() == 6);

  // Faster decay within each family group means a smaller k1 column.
  CHECK(table.rows[0].k1 > table.rows[1].k1);
  CHECK(table.rows[1].k1 > table.rows[2].k1);
  CHECK(table.rows[3].k1 > table.rows[4].k1);
  CHECK(table.rows[4].k1 > table.rows[5].k1);

  const std::string csv = table.to_csv();
  CHECK(csv.find("spectrum,k1,optimal_risk") == 0);
  CHECK(csv.find("inv_poly_a2") != std::string::npos);
  const std::string text = table.to_text();
  CHECK(text.find("inv_log_poly_b3") != std::string::npos);

  // Mismatched dimensions across rows are rejected.
  std::vector<ExperimentPlan> mixed = {plans[0], base_plan(10, 30, 2, 5)};
  CHECK_THROWS_AS(table_report(mixed, 1), ConfigError);
}