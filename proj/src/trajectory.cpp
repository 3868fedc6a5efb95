#include "gdrisk/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gdrisk/errors.hpp"
#include "gdrisk/numerics.hpp"

namespace gdrisk {

double default_learning_rate(const Spectrum& spectrum, double c) {
  return 1.0 / (c * spectrum.trace());
}

std::vector<Index> geometric_epoch_grid(Index t_max, int points_per_decade) {
  if (t_max < 0) throw std::invalid_argument("epoch grid: t_max must be >= 0");
  if (points_per_decade < 1) throw std::invalid_argument("epoch grid: need >= 1 point per decade");
  std::vector<Index> grid = {0};
  if (t_max >= 1) grid.push_back(1);
  const double step = std::pow(10.0, 1.0 / points_per_decade);
  double x = 1.0;
  while (grid.back() < t_max) {
    x *= step;
    const Index t = std::min<Index>(t_max, static_cast<Index>(std::llround(x)));
    if (t > grid.back()) grid.push_back(t);
  }
  return grid;
}

void TrajectoryConfig::validate(const Spectrum& spectrum, double stability_c) const {
  if (!(learning_rate >= 0.0)) throw ConfigError("trajectory: learning rate must be >= 0");
  const double limit = 1.0 / (stability_c * spectrum.trace());
  if (learning_rate > limit * (1.0 + 1e-12)) {
    throw StabilityError("trajectory: learning rate " + std::to_string(learning_rate) +
                         " above stability threshold " + std::to_string(limit));
  }
  if (t_grid.empty()) throw ConfigError("trajectory: epoch grid is empty");
  if (t_grid.front() < 0) throw ConfigError("trajectory: epochs must be >= 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (t_grid[i] <= t_grid[i - 1]) {
      throw ConfigError("trajectory: epoch grid must be strictly increasing");
    }
  }
}

namespace {

// Per-mode contraction arguments x_i = lr·μ_i/n; the closed form needs every
// x_i in [0, 1) or the power (1 - x_i)^t is no longer a contraction.
Eigen::ArrayXd contraction_arguments(const SampledDataset& ds, double lr) {
  const double n = static_cast<double>(ds.n());
  Eigen::ArrayXd x = lr / n * ds.svd.mu.array();
  if (x[0] >= 1.0) {
    throw StabilityError("closed form: lr*mu_1/n = " + std::to_string(x[0]) +
                         " >= 1, gradient descent is unstable at this step size");
  }
  return x;
}

}  // namespace

std::vector<Eigen::VectorXd> gd_iterate(const SampledDataset& ds, const Eigen::VectorXd& theta0,
                                        double lr, Index t_count) {
  if (theta0.size() != ds.p()) throw std::invalid_argument("gd_iterate: theta0 length mismatch");
  const double n = static_cast<double>(ds.n());
  const double norm_scale = min_norm(ds).norm() + theta0.norm() + 1.0;

  std::vector<Eigen::VectorXd> path;
  path.reserve(static_cast<std::size_t>(t_count) + 1);
  path.push_back(theta0);
  Eigen::VectorXd theta = theta0;
  for (Index t = 0; t < t_count; ++t) {
    theta -= (lr / n) * (ds.x.transpose() * (ds.x * theta - ds.y));
    if (theta.norm() > 1e6 * norm_scale) {
      throw StabilityError("gd_iterate: parameters diverged at epoch " + std::to_string(t + 1) +
                           "; reduce the step size");
    }
    path.push_back(theta);
  }
  return path;
}

Eigen::VectorXd closed_form_theta(const SampledDataset& ds, double lr, Index t) {
  if (t < 0) throw std::invalid_argument("closed_form_theta: t must be >= 0");
  const Eigen::ArrayXd x = contraction_arguments(ds, lr);
  const Eigen::VectorXd g = ds.svd.u.transpose() * ds.y;
  Eigen::VectorXd a(ds.n());
  for (Index i = 0; i < ds.n(); ++i) {
    a[i] = (1.0 - contraction_power(x[i], t)) * g[i] / std::sqrt(ds.svd.mu[i]);
  }
  return ds.svd.w * a;
}

Eigen::VectorXd min_norm(const SampledDataset& ds) {
  const Eigen::VectorXd g = ds.svd.u.transpose() * ds.y;
  return ds.svd.w * (g.array() / ds.svd.mu.array().sqrt()).matrix();
}

RiskTrajectory risk_trajectory(const SampledDataset& ds, const Spectrum& spectrum,
                               const Eigen::VectorXd& theta_star, const TrajectoryConfig& cfg) {
  cfg.validate(spectrum);
  if (theta_star.size() != ds.p()) {
    throw std::invalid_argument("risk_trajectory: theta_star length mismatch");
  }

  const Index n = ds.n();
  const Eigen::ArrayXd x = contraction_arguments(ds, cfg.learning_rate);
  const Eigen::VectorXd g = ds.svd.u.transpose() * ds.y;
  const Eigen::ArrayXd inv_sqrt_mu = ds.svd.mu.array().sqrt().inverse();

  const Eigen::VectorXd lambda = spectrum.leading(ds.p());
  const Eigen::MatrixXd scaled_w = lambda.asDiagonal() * ds.svd.w;  // ΣW
  const Eigen::MatrixXd m = ds.svd.w.transpose() * scaled_w;        // WᵀΣW
  const Eigen::VectorXd b = scaled_w.transpose() * theta_star;      // WᵀΣθ*
  const double c = theta_star.dot(lambda.asDiagonal() * theta_star);

  // Decomposition pieces (only when requested): bias uses Wᵀθ*, variance uses
  // K = √μ·M·√μ = UᵀXΣXᵀU and h = Uᵀε, both reduced to n×n forms.
  Eigen::VectorXd w_theta, h;
  Eigen::MatrixXd k_mat;
  if (cfg.include_decomposition) {
    w_theta = ds.svd.w.transpose() * theta_star;
    h = ds.svd.u.transpose() * ds.epsilon;
    const Eigen::VectorXd sqrt_mu = ds.svd.mu.cwiseSqrt();
    k_mat = sqrt_mu.asDiagonal() * m * sqrt_mu.asDiagonal();
  }

  const auto quadratic_risk = [&](const Eigen::VectorXd& a) {
    const double value = 0.5 * (a.dot(m * a) - 2.0 * a.dot(b) + c);
    if (value < -1e-6 * std::max(1.0, c)) {
      throw NumericError("risk_trajectory: quadratic form went negative (" +
                         std::to_string(value) + ")");
    }
    return std::max(value, 0.0);
  };

  RiskTrajectory out;
  out.t_grid = cfg.t_grid;
  out.risk.reserve(cfg.t_grid.size());

  Eigen::VectorXd a(n), fade(n);
  for (Index t : cfg.t_grid) {
    for (Index i = 0; i < n; ++i) {
      fade[i] = 1.0 - contraction_power(x[i], t);
      a[i] = fade[i] * g[i] * inv_sqrt_mu[i];
    }
    out.risk.push_back(quadratic_risk(a));
    if (cfg.include_decomposition) {
      const Eigen::VectorXd q = fade.cwiseProduct(w_theta);
      const double bias = c - 2.0 * q.dot(b) + q.dot(m * q);
      const Eigen::VectorXd v = fade.cwiseProduct(h).cwiseQuotient(ds.svd.mu);
      const double variance = v.dot(k_mat * v);
      out.bias_part.push_back(std::max(bias, 0.0));
      out.variance_part.push_back(std::max(variance, 0.0));
    }
  }

  const Eigen::VectorXd a_limit = (g.array() * inv_sqrt_mu).matrix();
  out.min_norm_risk = quadratic_risk(a_limit);

  const auto it = std::min_element(out.risk.begin(), out.risk.end());
  out.min_risk = *it;
  out.argmin_t = out.t_grid[static_cast<std::size_t>(it - out.risk.begin())];
  return out;
}

std::vector<RegionInterval> region_scan(std::span<const MeanCurve> curves, double threshold) {
  if (!(threshold >= 0.0)) throw std::invalid_argument("region_scan: threshold must be >= 0");
  std::vector<RegionInterval> out;
  for (const MeanCurve& curve : curves) {
    if (curve.t_grid.size() != curve.mean_risk.size() || curve.t_grid.empty()) {
      throw std::invalid_argument("region_scan: malformed mean curve");
    }
    RegionInterval interval;
    interval.n = curve.n;

    std::size_t best_len = 0, best_start = 0;
    std::size_t run_start = 0, run_len = 0;
    for (std::size_t i = 0; i < curve.mean_risk.size(); ++i) {
      if (curve.mean_risk[i] <= threshold) {
        if (run_len == 0) run_start = i;
        ++run_len;
        if (run_len > best_len) {
          best_len = run_len;
          best_start = run_start;
        }
      } else {
        run_len = 0;
      }
    }

    if (best_len > 0) {
      interval.empty = false;
      interval.t_lo = curve.t_grid[best_start];
      interval.t_hi = curve.t_grid[best_start + best_len - 1];
      interval.lo_times_lr = static_cast<double>(interval.t_lo) * curve.learning_rate;
      interval.hi_lr_over_n =
          static_cast<double>(interval.t_hi) * curve.learning_rate / static_cast<double>(curve.n);
    }
    out.push_back(interval);
  }
  return out;
}

}  // namespace gdrisk
