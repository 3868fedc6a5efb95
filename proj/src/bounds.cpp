#include "gdrisk/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gdrisk/errors.hpp"
#include "gdrisk/numerics.hpp"

namespace gdrisk {

CtnStrategy CtnStrategy::constant(double v) {
  if (!(v > 0.0)) throw ConfigError("c(t,n): constant must be positive");
  return {Kind::kConstant, v};
}

CtnStrategy CtnStrategy::power_law(double beta) {
  if (!(beta >= 0.0)) throw ConfigError("c(t,n): power-law exponent must be >= 0");
  return {Kind::kPowerLaw, beta};
}

double CtnStrategy::operator()(Index n) const {
  if (kind == Kind::kConstant) return value;
  return std::pow(static_cast<double>(n), -value);
}

double bias_bound(const Spectrum& spectrum, Index n, double lr, Index t,
                  const BoundParams& params) {
  if (t < 0) throw std::invalid_argument("bias_bound: t must be >= 0");
  if (!(params.delta > 0.0 && params.delta < 1.0)) {
    throw std::invalid_argument("bias_bound: delta must be in (0,1)");
  }
  if (t == 0) return std::numeric_limits<double>::infinity();

  const double nn = static_cast<double>(n);
  const double r = spectrum.effective_rank();
  const double log_term = std::log(1.0 / params.delta);
  const double concentration =
      std::max(std::max(std::sqrt(r / nn), r / nn),
               std::max(std::sqrt(log_term / nn), log_term / nn));
  const double theta_sq = params.theta_norm * params.theta_norm;
  return params.bias_multiplier * theta_sq *
         (1.0 / (lr * static_cast<double>(t)) + spectrum.operator_norm() * concentration);
}

double variance_bound(const Spectrum& spectrum, Index n, double lr, Index t,
                      const CtnStrategy& ctn, const BoundParams& params) {
  if (t < 0) throw std::invalid_argument("variance_bound: t must be >= 0");
  if (!(params.delta > 0.0 && params.delta < 1.0)) {
    throw std::invalid_argument("variance_bound: delta must be in (0,1)");
  }
  const double nn = static_cast<double>(n);
  const double c_tn = ctn(n);
  const double k1 = static_cast<double>(effective_dims(spectrum, n, params.c0, params.c1).k1);
  const double k2 = static_cast<double>(k2_dim(spectrum, n, params.c2, c_tn).k2);
  const double growth = lr * static_cast<double>(t) / nn * spectrum.trace();
  const double log_term = std::log(1.0 / params.delta);
  return params.variance_multiplier * params.sigma_y * params.sigma_y * log_term *
         (k1 / nn + k2 / (c_tn * nn) + c_tn * growth * growth);
}

BcMatrices explicit_bc_matrices(const SampledDataset& ds, const Spectrum& spectrum,
                                const Eigen::VectorXd& theta_star, double lr, Index t) {
  if (ds.p() > 200) {
    throw NumericError("explicit_bc_matrices: p = " + std::to_string(ds.p()) +
                       " exceeds the 200-column guard for dense p×p work");
  }
  if (t < 0) throw std::invalid_argument("explicit_bc_matrices: t must be >= 0");
  if (theta_star.size() != ds.p()) {
    throw std::invalid_argument("explicit_bc_matrices: theta_star length mismatch");
  }

  const Index n = ds.n();
  const Index p = ds.p();
  const double nn = static_cast<double>(n);
  Eigen::ArrayXd x = lr / nn * ds.svd.mu.array();
  if (x[0] >= 1.0) {
    throw StabilityError("explicit_bc_matrices: lr*mu_1/n >= 1, unstable step size");
  }

  Eigen::VectorXd decay(n), fade(n);
  for (Index i = 0; i < n; ++i) {
    decay[i] = contraction_power(x[i], t);  // (1 − lr·μ_i/n)^t
    fade[i] = 1.0 - decay[i];
  }

  const Eigen::VectorXd lambda = spectrum.leading(p);

  // (I − (λ/n)XᵀX)^t = I − W(I − D_t)Wᵀ on the row space, identity off it.
  const Eigen::MatrixXd contraction_p =
      Eigen::MatrixXd::Identity(p, p) - ds.svd.w * fade.asDiagonal() * ds.svd.w.transpose();

  BcMatrices out;
  out.b = contraction_p * lambda.asDiagonal() * contraction_p;

  // C via the SVD: U·diag(fade/μ)·Uᵀ · XΣXᵀ · U·diag(fade/μ)·Uᵀ.
  const Eigen::VectorXd fade_over_mu = fade.cwiseQuotient(ds.svd.mu);
  const Eigen::MatrixXd outer =
      ds.svd.u * fade_over_mu.asDiagonal() * ds.svd.u.transpose();
  const Eigen::MatrixXd design_cov = ds.x * lambda.asDiagonal() * ds.x.transpose();
  out.c = outer * design_cov * outer;

  out.bias_value = theta_star.dot(out.b * theta_star);
  out.variance_trace = out.c.trace();
  return out;
}

ComparisonBounds comparison_bounds(const Spectrum& spectrum, Index n, double c0, double c1) {
  const EffectiveDims dims = effective_dims(spectrum, n, c0, c1);
  const double nn = static_cast<double>(n);

  if (spectrum.tail_sum(dims.k0) <= 0.0) {
    throw NumericError(spectrum.id() + ": tail vanishes at k0, last-iterate bound undefined");
  }

  ComparisonBounds out;
  out.bartlett = static_cast<double>(dims.k0) / nn + nn / spectrum.tail_rank(dims.k0);
  const double trace = spectrum.trace();
  out.zou = static_cast<double>(dims.k1) / nn +
            nn * spectrum.tail_sum_squares(dims.k1) / (trace * trace);
  return out;
}

std::vector<BoundCurvePoint> bound_curve(const Spectrum& spectrum, Index n, double lr,
                                         std::span<const Index> t_grid, const CtnStrategy& ctn,
                                         const BoundParams& params) {
  // k1 and (for these strategies) k2 do not depend on t; hoist the scans.
  const double nn = static_cast<double>(n);
  const double c_tn = ctn(n);
  const double k1 = static_cast<double>(effective_dims(spectrum, n, params.c0, params.c1).k1);
  const Index k2 = k2_dim(spectrum, n, params.c2, c_tn).k2;
  const double log_term = std::log(1.0 / params.delta);
  const double var_floor =
      params.variance_multiplier * params.sigma_y * params.sigma_y * log_term *
      (k1 / nn + static_cast<double>(k2) / (c_tn * nn));
  const double var_growth_coeff = params.variance_multiplier * params.sigma_y * params.sigma_y *
                                  log_term * c_tn *
                                  (lr / nn * spectrum.trace()) * (lr / nn * spectrum.trace());

  std::vector<BoundCurvePoint> out;
  out.reserve(t_grid.size());
  for (Index t : t_grid) {
    BoundCurvePoint point;
    point.t = t;
    point.bias = bias_bound(spectrum, n, lr, t, params);
    point.variance = var_floor + var_growth_coeff * static_cast<double>(t) * static_cast<double>(t);
    point.total = point.bias + point.variance;
    point.k2 = k2;
    out.push_back(point);
  }
  return out;
}

BoundReport make_bound_report(const Spectrum& spectrum, Index n, double lr,
                              std::span<const Index> t_grid, const CtnStrategy& ctn,
                              const BoundParams& params) {
  BoundReport report;
  report.curve = bound_curve(spectrum, n, lr, t_grid, ctn, params);
  const EffectiveDims dims = effective_dims(spectrum, n, params.c0, params.c1);
  report.k0 = dims.k0;
  report.k1 = dims.k1;
  report.r_sigma = dims.r_sigma;
  const ComparisonBounds cmp = comparison_bounds(spectrum, n, params.c0, params.c1);
  report.bartlett_bound = cmp.bartlett;
  report.zou_bound = cmp.zou;
  report.params = params;
  return report;
}

MinBoundResult min_bound_over_t(const Spectrum& spectrum, Index n, double lr,
                                std::span<const Index> t_grid, const CtnStrategy& ctn,
                                const BoundParams& params) {
  if (t_grid.size() < 3) throw std::invalid_argument("min_bound_over_t: need >= 3 epochs");
  if (t_grid.front() < 1) {
    throw std::invalid_argument("min_bound_over_t: grid must start at t >= 1");
  }
  const std::vector<BoundCurvePoint> curve = bound_curve(spectrum, n, lr, t_grid, ctn, params);

  // The grid must bracket the U-shape, otherwise the minimum is an endpoint
  // artifact.
  const std::size_t m = curve.size();
  if (!(curve[0].total > curve[1].total)) {
    throw NumericError("min_bound_over_t: bound not decreasing at grid start; widen the grid");
  }
  if (!(curve[m - 1].total > curve[m - 2].total)) {
    throw NumericError("min_bound_over_t: bound not increasing at grid end; widen the grid");
  }

  MinBoundResult result;
  std::size_t best = 0;
  for (std::size_t i = 1; i < m; ++i) {
    if (curve[i].total < curve[best].total) best = i;
  }
  result.argmin_total = curve[best].t;
  result.min_total = curve[best].total;

  bool crossed = false;
  for (std::size_t i = 0; i < m; ++i) {
    if (curve[i].variance >= curve[i].bias) {
      result.balance_t = curve[i].t;
      result.balance_value = curve[i].total;
      crossed = true;
      break;
    }
  }
  if (!crossed) {
    throw NumericError("min_bound_over_t: variance never overtakes bias on the grid; "
                       "extend it to larger epochs");
  }

  const EffectiveDims dims = effective_dims(spectrum, n, params.c0, params.c1);
  const double nn = static_cast<double>(n);
  result.target = std::max(std::sqrt(spectrum.effective_rank()), 1.0) / std::sqrt(nn) +
                  std::max(static_cast<double>(dims.k1), 1.0) / nn;
  return result;
}

}  // namespace gdrisk
