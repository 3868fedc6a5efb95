#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gdrisk/instance.hpp"
#include "gdrisk/spectrum.hpp"

namespace gdrisk {

// 1/(c·trace Σ); the default c = 2 keeps full-batch GD inside the stable
// step-size range for every sampled design with high probability.
double default_learning_rate(const Spectrum& spectrum, double c = 2.0);

// {0, 1, geometric points} rounded to unique integers, `points_per_decade`
// of them per factor of ten up to t_max. Log-scale risk curves need this
// coverage to resolve both descent and overfitting branches.
std::vector<Index> geometric_epoch_grid(Index t_max, int points_per_decade = 20);

struct TrajectoryConfig {
  double learning_rate = 0.0;
  std::vector<Index> t_grid;
  bool include_decomposition = false;

  // Enforces lr ≤ 1/(stability_c·trace) and a sane epoch grid.
  void validate(const Spectrum& spectrum, double stability_c = 2.0) const;
};

// Literal GD recursion θ_{t+1} = θ_t − (lr/n)·Xᵀ(Xθ_t − Y); returns
// θ_0..θ_T. Reference implementation used as the oracle for the closed form.
std::vector<Eigen::VectorXd> gd_iterate(const SampledDataset& ds, const Eigen::VectorXd& theta0,
                                        double lr, Index t_count);

// θ_t from zero initialization: W·a_t with a_t[i] = (1 − (1 − lr·μ_i/n)^t)·g_i/√μ_i,
// g = UᵀY. Powers go through exp(t·log1p(·)), so any epoch is O(n) to reach.
Eigen::VectorXd closed_form_theta(const SampledDataset& ds, double lr, Index t);

// Min-norm interpolator Xᵀ(XXᵀ)⁻¹Y, the t → ∞ limit of the trajectory.
Eigen::VectorXd min_norm(const SampledDataset& ds);

struct RiskTrajectory {
  std::vector<Index> t_grid;
  std::vector<double> risk;
  std::vector<double> bias_part;      // filled when decomposition requested
  std::vector<double> variance_part;  // idem
  double min_norm_risk = 0.0;
  Index argmin_t = 0;   // earliest epoch attaining the grid minimum
  double min_risk = 0.0;
};

// Exact excess risk along the epoch grid without materializing p-vectors per
// epoch: precomputes M = WᵀΣW, b = WᵀΣθ*, c = θ*ᵀΣθ* and evaluates
// R(θ_t) = ½(a_tᵀM a_t − 2 a_tᵀb + c) in O(n²) per epoch.
RiskTrajectory risk_trajectory(const SampledDataset& ds, const Spectrum& spectrum,
                               const Eigen::VectorXd& theta_star, const TrajectoryConfig& cfg);

struct MeanCurve {
  Index n = 0;
  double learning_rate = 0.0;
  std::vector<Index> t_grid;
  std::vector<double> mean_risk;
};

// Maximal contiguous epoch interval with mean risk at or below the threshold,
// per sample size. Endpoints are also reported normalized by 1/λ and n/λ so
// growth of the low-risk region with n is visible.
struct RegionInterval {
  Index n = 0;
  bool empty = true;
  Index t_lo = 0;
  Index t_hi = 0;
  double lo_times_lr = 0.0;   // t_lo / (1/λ)
  double hi_lr_over_n = 0.0;  // t_hi / (n/λ)
};

std::vector<RegionInterval> region_scan(std::span<const MeanCurve> curves, double threshold);

}  // namespace gdrisk
