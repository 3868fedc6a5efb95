#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gdrisk/instance.hpp"
#include "gdrisk/trajectory.hpp"

namespace gdrisk {

enum class Quantity { kOptimalRisk, kMinNormRisk, kArgminT, kFullCurve };

enum class ThetaMode { kDecay, kFirstBasis, kRandomIso };

// Repeated-trial experiment over one problem template. Trial i draws its
// dataset from the stream derived from (master_seed, i), so results are a
// pure function of the plan no matter how many workers run it.
struct ExperimentPlan {
  Spectrum spectrum;
  Index n = 0;
  Index p = 0;
  double noise_sigma = 1.0;
  ThetaMode theta_mode = ThetaMode::kDecay;
  double theta_norm = 1.0;
  // Takes precedence over theta_mode when set (length p).
  std::optional<Eigen::VectorXd> theta_star_override;
  FeatureLaw feature_law = FeatureLaw::kGaussian;
  std::uint64_t master_seed = 0;
  int trials = 1;
  TrajectoryConfig trajectory;
  std::vector<Quantity> quantities;

  ProblemInstance make_instance() const;
  void validate() const;
};

struct Summary {
  double mean = 0.0;
  double ci_half_width = 0.0;  // 1.96·sd/√trials; zero for a single trial
  int trials = 0;
};

struct ExperimentResult {
  std::optional<Summary> optimal_risk;
  std::optional<Summary> min_norm_risk;
  std::optional<Summary> argmin_t;
  std::vector<Index> t_grid;      // present when the full curve was requested
  std::vector<Summary> curve;     // per-epoch mean risk with CI
};

// Runs all trials (in parallel when threads > 1) and aggregates in trial
// order. Any rank-deficient trial aborts the experiment with the offending
// seeds listed; partial results are never returned.
ExperimentResult run_experiment(const ExperimentPlan& plan, int threads = 1);

// Per-trial seed derivation, exposed so error messages and tests can name
// the exact offending stream.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index);

struct TableRow {
  std::string spectrum_id;
  Index k1 = 0;
  Summary optimal_risk;
  Summary min_norm_risk;
};

struct Table {
  std::vector<TableRow> rows;

  std::string to_text() const;
  std::string to_csv() const;
};

// One row per plan: (spectrum, k1, optimal risk ± CI, min-norm risk ± CI).
// All plans must share the same n and p.
Table table_report(std::span<const ExperimentPlan> plans, int threads = 1);

}  // namespace gdrisk
