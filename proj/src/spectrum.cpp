#include "gdrisk/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gdrisk/errors.hpp"
#include "gdrisk/numerics.hpp"

namespace gdrisk {

namespace {

// Head/tail split point for infinite spectra: indices up to the anchor are
// summed exactly, the remainder comes from an Euler-Maclaurin expansion whose
// truncation error at this anchor is far below the 1e-10 contract.
constexpr Index kEmAnchor = 4096;

// Largest finite dimension whose suffix sums we materialize (64 MiB of
// doubles across both arrays).
constexpr Index kMaxMaterialized = Index(1) << 22;

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// ⌈base^expo⌉ with snapping so that exact integer powers (100^1.5 = 1000)
// do not round up from floating noise.
Index ceil_pow(Index base, double expo) {
  const double x = std::pow(static_cast<double>(base), expo);
  const double snapped = std::round(x);
  if (std::abs(x - snapped) < 1e-9 * std::max(1.0, std::abs(x))) {
    return static_cast<Index>(snapped);
  }
  return static_cast<Index>(std::ceil(x));
}

double inv_poly_lambda(double alpha, Index i) {
  return std::pow(static_cast<double>(i), -alpha);
}

double inv_log_lambda(double beta, Index i) {
  const double x = static_cast<double>(i);
  return 1.0 / (x * std::pow(std::log(x + 1.0), beta));
}

// Σ_{i=m}^∞ i^{-a} for a > 1, valid once m is past the anchor.
double inv_poly_sum_from(double a, Index m) {
  const double x = static_cast<double>(m);
  const double fx = std::pow(x, -a);
  return fx * (x / (a - 1.0) + 0.5 + a / (12.0 * x) -
               a * (a + 1.0) * (a + 2.0) / (720.0 * x * x * x));
}

// Σ_{i=m}^∞ 1/(i·ln^β(i+1)) for β > 1 via Euler-Maclaurin. Substituting
// t = ln(x+1) turns the integral part into ∫ t^{-β} dt plus an exponentially
// decaying correction ∫ t^{-β} e^{-t}/(1-e^{-t}) dt handled by quadrature.
double inv_log_sum_from(double beta, Index m) {
  const double x = static_cast<double>(m);
  const double t0 = std::log(x + 1.0);
  const double correction = integrate(
      [beta](double t) {
        const double e = std::exp(-t);
        return std::pow(t, -beta) * e / (1.0 - e);
      },
      t0, t0 + 60.0, 48);
  const double integral = std::pow(t0, 1.0 - beta) / (beta - 1.0) + correction;
  const double f = 1.0 / (x * std::pow(t0, beta));
  const double fp = -f / x - beta * f / ((x + 1.0) * t0);
  return integral + 0.5 * f - fp / 12.0;
}

// Σ_{i=m}^∞ 1/(i²·ln^{2β}(i+1)); the substituted integrand decays like
// e^{-t}, so a single quadrature covers the whole integral part.
double inv_log_sq_sum_from(double beta, Index m) {
  const double x = static_cast<double>(m);
  const double t0 = std::log(x + 1.0);
  const double s = 2.0 * beta;
  const double integral = integrate(
      [s](double t) {
        const double e = std::exp(-t);
        const double d = 1.0 - e;
        return std::pow(t, -s) * e / (d * d);
      },
      t0, t0 + 60.0, 48);
  const double g = 1.0 / (x * x * std::pow(t0, s));
  const double gp = -2.0 * g / x - s * g / ((x + 1.0) * t0);
  return integral + 0.5 * g - gp / 12.0;
}

}  // namespace

Spectrum::Spectrum() : family_(Family::kExplicit), p_(1), values_{1.0}, id_("explicit_p1") {
  build_caches();
}

Spectrum Spectrum::inverse_polynomial(double alpha, Index p) {
  if (p == kInfinite && alpha <= 1.0) {
    throw ConfigError("inv_poly: infinite dimension needs alpha > 1 for a finite trace");
  }
  if (alpha <= 0.0) throw ConfigError("inv_poly: alpha must be positive");
  if (p != kInfinite && p < 1) throw ConfigError("inv_poly: dimension must be positive");
  Spectrum s;
  s.family_ = Family::kInversePolynomial;
  s.shape_a_ = alpha;
  s.p_ = p;
  s.id_ = "inv_poly_a" + format_param(alpha);
  s.build_caches();
  return s;
}

Spectrum Spectrum::inverse_log_polynomial(double beta, Index p) {
  if (p == kInfinite && beta <= 1.0) {
    throw ConfigError("inv_log_poly: infinite dimension needs beta > 1 for a finite trace");
  }
  if (beta <= 0.0) throw ConfigError("inv_log_poly: beta must be positive");
  if (p != kInfinite && p < 1) throw ConfigError("inv_log_poly: dimension must be positive");
  Spectrum s;
  s.family_ = Family::kInverseLogPolynomial;
  s.shape_a_ = beta;
  s.p_ = p;
  s.id_ = "inv_log_poly_b" + format_param(beta);
  s.build_caches();
  return s;
}

Spectrum Spectrum::constant_block(double epsilon, Index n) {
  if (epsilon < 0.0) throw ConfigError("constant: epsilon must be non-negative");
  if (n < 1) throw ConfigError("constant: sample size must be positive");
  Spectrum s;
  s.family_ = Family::kConstant;
  s.shape_a_ = epsilon;
  s.p_ = ceil_pow(n, 1.0 + epsilon);
  s.id_ = "constant_e" + format_param(epsilon) + "_n" + std::to_string(n);
  return s;
}

Spectrum Spectrum::piecewise_constant(double r, double q, Index n) {
  if (r <= 0.0 || r > 1.0) throw ConfigError("piecewise_constant: need 0 < r <= 1");
  if (q <= 1.0) throw ConfigError("piecewise_constant: need q > 1");
  if (n < 1) throw ConfigError("piecewise_constant: sample size must be positive");
  Spectrum s;
  s.family_ = Family::kPiecewiseConstant;
  s.shape_a_ = r;
  s.shape_b_ = q;
  s.block_split_ = ceil_pow(n, r);
  s.p_ = ceil_pow(n, q);
  if (s.p_ < 2 * s.block_split_) {
    throw ConfigError("piecewise_constant: n^q < 2*n^r breaks the non-increasing order");
  }
  s.id_ = "piecewise_r" + format_param(r) + "_q" + format_param(q) + "_n" + std::to_string(n);
  return s;
}

Spectrum Spectrum::explicit_values(std::vector<double> values) {
  if (values.empty()) throw ConfigError("explicit: need at least one eigenvalue");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) throw ConfigError("explicit: eigenvalues must be positive");
    if (i > 0 && values[i] > values[i - 1]) {
      throw ConfigError("explicit: eigenvalues must be non-increasing");
    }
  }
  Spectrum s;
  s.family_ = Family::kExplicit;
  s.p_ = static_cast<Index>(values.size());
  s.values_ = std::move(values);
  s.id_ = "explicit_p" + std::to_string(s.p_);
  s.build_caches();
  return s;
}

void Spectrum::build_caches() {
  const bool block_family =
      family_ == Family::kConstant || family_ == Family::kPiecewiseConstant;
  if (block_family) return;  // tails are closed-form arithmetic

  if (finite()) {
    if (p_ > kMaxMaterialized) {
      throw ConfigError(id_ + ": finite dimension too large to materialize");
    }
    suffix_.assign(static_cast<std::size_t>(p_) + 1, 0.0);
    suffix_sq_.assign(static_cast<std::size_t>(p_) + 1, 0.0);
    CompensatedSum acc, acc_sq;
    for (Index i = p_; i >= 1; --i) {
      const double v = lambda_or_zero(i);
      acc.add(v);
      acc_sq.add(v * v);
      suffix_[static_cast<std::size_t>(i) - 1] = acc.value();
      suffix_sq_[static_cast<std::size_t>(i) - 1] = acc_sq.value();
    }
    return;
  }

  // Infinite dimension: exact head plus analytic remainder past the anchor.
  if (family_ == Family::kInversePolynomial) {
    tail_beyond_anchor_ = inv_poly_sum_from(shape_a_, kEmAnchor + 1);
    tail_sq_beyond_anchor_ = inv_poly_sum_from(2.0 * shape_a_, kEmAnchor + 1);
  } else {
    tail_beyond_anchor_ = inv_log_sum_from(shape_a_, kEmAnchor + 1);
    tail_sq_beyond_anchor_ = inv_log_sq_sum_from(shape_a_, kEmAnchor + 1);
  }
  suffix_.assign(static_cast<std::size_t>(kEmAnchor) + 1, 0.0);
  suffix_sq_.assign(static_cast<std::size_t>(kEmAnchor) + 1, 0.0);
  CompensatedSum acc, acc_sq;
  for (Index i = kEmAnchor; i >= 1; --i) {
    const double v = lambda_or_zero(i);
    acc.add(v);
    acc_sq.add(v * v);
    suffix_[static_cast<std::size_t>(i) - 1] = acc.value();
    suffix_sq_[static_cast<std::size_t>(i) - 1] = acc_sq.value();
  }
}

double Spectrum::lambda_or_zero(Index i) const {
  if (finite() && i > p_) return 0.0;
  switch (family_) {
    case Family::kInversePolynomial:
      return inv_poly_lambda(shape_a_, i);
    case Family::kInverseLogPolynomial:
      return inv_log_lambda(shape_a_, i);
    case Family::kConstant:
      return 1.0 / static_cast<double>(p_);
    case Family::kPiecewiseConstant:
      return i <= block_split_ ? 1.0 / static_cast<double>(block_split_)
                               : 1.0 / static_cast<double>(p_ - block_split_);
    case Family::kExplicit:
      return values_[static_cast<std::size_t>(i) - 1];
  }
  return 0.0;
}

double Spectrum::eigenvalue(Index i) const {
  if (i < 1) throw std::out_of_range(id_ + ": eigenvalue index must be >= 1");
  if (finite() && i > p_) {
    throw std::out_of_range(id_ + ": eigenvalue index " + std::to_string(i) +
                            " beyond dimension " + std::to_string(p_));
  }
  return lambda_or_zero(i);
}

double Spectrum::tail_sum(Index k) const {
  if (k < 0) throw std::out_of_range(id_ + ": tail index must be >= 0");
  switch (family_) {
    case Family::kConstant: {
      if (k >= p_) return 0.0;
      return static_cast<double>(p_ - k) / static_cast<double>(p_);
    }
    case Family::kPiecewiseConstant: {
      if (k >= p_) return 0.0;
      const Index s = block_split_;
      if (k >= s) return static_cast<double>(p_ - k) / static_cast<double>(p_ - s);
      return static_cast<double>(s - k) / static_cast<double>(s) + 1.0;
    }
    default:
      break;
  }
  if (finite()) {
    if (k >= p_) return 0.0;
    return suffix_[static_cast<std::size_t>(k)];
  }
  if (k <= kEmAnchor) {
    return suffix_[static_cast<std::size_t>(k)] + tail_beyond_anchor_;
  }
  return family_ == Family::kInversePolynomial ? inv_poly_sum_from(shape_a_, k + 1)
                                               : inv_log_sum_from(shape_a_, k + 1);
}

double Spectrum::tail_sum_squares(Index k) const {
  if (k < 0) throw std::out_of_range(id_ + ": tail index must be >= 0");
  switch (family_) {
    case Family::kConstant: {
      if (k >= p_) return 0.0;
      const double n = static_cast<double>(p_);
      return static_cast<double>(p_ - k) / (n * n);
    }
    case Family::kPiecewiseConstant: {
      if (k >= p_) return 0.0;
      const Index s = block_split_;
      const double tail_len = static_cast<double>(p_ - s);
      if (k >= s) return static_cast<double>(p_ - k) / (tail_len * tail_len);
      const double head_len = static_cast<double>(s);
      return static_cast<double>(s - k) / (head_len * head_len) + 1.0 / tail_len;
    }
    default:
      break;
  }
  if (finite()) {
    if (k >= p_) return 0.0;
    return suffix_sq_[static_cast<std::size_t>(k)];
  }
  if (k <= kEmAnchor) {
    return suffix_sq_[static_cast<std::size_t>(k)] + tail_sq_beyond_anchor_;
  }
  return family_ == Family::kInversePolynomial
             ? inv_poly_sum_from(2.0 * shape_a_, k + 1)
             : inv_log_sq_sum_from(shape_a_, k + 1);
}

double Spectrum::tail_rank(Index k) const {
  const double sq = tail_sum_squares(k);
  if (sq <= 0.0) {
    throw NumericError(id_ + ": tail rank undefined, squared tail vanishes at k=" +
                       std::to_string(k));
  }
  const double t = tail_sum(k);
  return t * t / sq;
}

Eigen::VectorXd Spectrum::leading(Index count) const {
  if (count < 0 || (finite() && count > p_)) {
    throw std::out_of_range(id_ + ": cannot materialize " + std::to_string(count) +
                            " eigenvalues");
  }
  Eigen::VectorXd out(count);
  for (Index i = 1; i <= count; ++i) out[i - 1] = lambda_or_zero(i);
  return out;
}

namespace {

// Ascending scan for the smallest l satisfying `done`. The cap guards
// pathological spectra whose thresholds are never met.
Index scan_min_index(const Spectrum& sp, Index n, const std::function<bool(Index)>& done) {
  const Index hard_cap = 10 * n + 1000000;
  const double eps_floor = std::numeric_limits<double>::epsilon() * sp.operator_norm();
  for (Index l = 0;; ++l) {
    if (done(l)) return l;
    if (sp.finite() && l >= sp.dim()) {
      // λ_{l+1} = 0 and empty tails make every threshold hold at l = p.
      return sp.dim();
    }
    if (l > hard_cap) {
      throw NumericError(sp.id() + ": effective-dimension scan exceeded cap at l=" +
                         std::to_string(l));
    }
    if (!sp.finite() && sp.eigenvalue(l + 1) < eps_floor) {
      throw NumericError(sp.id() + ": scan reached machine-epsilon eigenvalues without "
                         "meeting its threshold (pathological instance)");
    }
  }
}

}  // namespace

EffectiveDims effective_dims(const Spectrum& spectrum, Index n, double c0, double c1) {
  if (n < 1) throw std::invalid_argument("effective_dims: n must be positive");
  if (c0 <= 0.0 || c1 <= 0.0) throw std::invalid_argument("effective_dims: constants must be positive");

  EffectiveDims dims;
  dims.r_sigma = spectrum.effective_rank();
  const double nn = static_cast<double>(n);

  dims.k0 = scan_min_index(spectrum, n, [&](Index l) {
    const double lam = l < spectrum.dim() ? spectrum.eigenvalue(l + 1) : 0.0;
    return lam <= c0 * spectrum.tail_sum(l) / nn;
  });
  const double k1_threshold = c1 * spectrum.trace() / nn;
  dims.k1 = scan_min_index(spectrum, n, [&](Index l) {
    const double lam = l < spectrum.dim() ? spectrum.eigenvalue(l + 1) : 0.0;
    return lam <= k1_threshold;
  });
  return dims;
}

K2Result k2_dim(const Spectrum& spectrum, Index n, double c2, double c_tn) {
  if (n < 1) throw std::invalid_argument("k2_dim: n must be positive");
  if (c2 <= 0.0 || c_tn <= 0.0) throw std::invalid_argument("k2_dim: constants must be positive");

  const double threshold = c2 * c_tn * spectrum.trace();
  const double nn = static_cast<double>(n);
  K2Result result;
  result.k2 = scan_min_index(spectrum, n, [&](Index l) {
    const double lam = l < spectrum.dim() ? spectrum.eigenvalue(l + 1) : 0.0;
    return spectrum.tail_sum(l) + nn * lam <= threshold;
  });
  result.capped = spectrum.finite() && result.k2 == spectrum.dim();
  return result;
}

std::vector<RateRow> rate_table(const std::function<Spectrum(Index)>& family_at,
                                std::span<const Index> n_grid, double c0, double c1) {
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) {
      throw std::invalid_argument("rate_table: n grid must be strictly increasing");
    }
  }
  std::vector<RateRow> rows;
  rows.reserve(n_grid.size());
  for (Index n : n_grid) {
    const Spectrum sp = family_at(n);
    const EffectiveDims dims = effective_dims(sp, n, c0, c1);
    rows.push_back({n, dims.k0, dims.k1, dims.r_sigma});
  }
  return rows;
}

}  // namespace gdrisk
