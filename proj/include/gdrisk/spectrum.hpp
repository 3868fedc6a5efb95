#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gdrisk {

using Index = std::int64_t;

// A non-increasing, summable eigenvalue sequence λ_1 ≥ λ_2 ≥ ... together
// with analytic tail sums Σ_{i>k} λ_i and Σ_{i>k} λ_i².
//
// The eigenbasis is fixed to the identity throughout the project: every
// downstream quantity (risks, bounds, effective dimensions) depends on the
// covariance only through its eigenvalues and the coordinates of the target
// parameter in the eigenbasis, so nothing is lost by working diagonally.
//
// Families named in config files: "inv_poly" (λ_i = 1/i^α), "inv_log_poly"
// (λ_i = 1/(i·ln^β(i+1)), natural log), "constant" (N = ⌈n^{1+ε}⌉ equal
// eigenvalues 1/N), "piecewise_constant" (s = ⌈n^r⌉ values 1/s followed by
// d−s values 1/(d−s), d = ⌈n^q⌉), and "explicit" (stored values).
//
// Dimension may be infinite for the two polynomial families; tail sums then
// use Euler-Maclaurin expansions with absolute error well below 1e-10.
class Spectrum {
 public:
  enum class Family {
    kInversePolynomial,
    kInverseLogPolynomial,
    kConstant,
    kPiecewiseConstant,
    kExplicit,
  };

  static constexpr Index kInfinite = std::numeric_limits<Index>::max();

  // A placeholder single unit eigenvalue, so value members of plan/instance
  // structs are always in a defined state.
  Spectrum();

  static Spectrum inverse_polynomial(double alpha, Index p = kInfinite);
  static Spectrum inverse_log_polynomial(double beta, Index p = kInfinite);
  static Spectrum constant_block(double epsilon, Index n);
  static Spectrum piecewise_constant(double r, double q, Index n);
  static Spectrum explicit_values(std::vector<double> values);

  Family family() const { return family_; }
  Index dim() const { return p_; }
  bool finite() const { return p_ != kInfinite; }

  // λ_i, 1-based. Throws std::out_of_range when i < 1 or i exceeds a finite
  // dimension.
  double eigenvalue(Index i) const;

  // Σ_{i>k} λ_i. Exact finite sums for finite dimension; analytic tails
  // otherwise (absolute error ≤ 1e-10).
  double tail_sum(Index k) const;

  // Σ_{i>k} λ_i², same conventions as tail_sum.
  double tail_sum_squares(Index k) const;

  double trace() const { return tail_sum(0); }
  double operator_norm() const { return eigenvalue(1); }

  // r(Σ) = trace / λ_1.
  double effective_rank() const { return trace() / operator_norm(); }

  // R_k(Σ) = (Σ_{i>k} λ_i)² / Σ_{i>k} λ_i². Throws NumericError when the
  // squared tail vanishes.
  double tail_rank(Index k) const;

  // Materializes λ_1..λ_count as a dense vector (for sampling).
  Eigen::VectorXd leading(Index count) const;

  // Compact identifier used in file names and diagnostics.
  const std::string& id() const { return id_; }

 private:
  double lambda_or_zero(Index i) const;  // λ_i, zero past a finite dimension
  void build_caches();

  Family family_ = Family::kExplicit;
  Index p_ = 0;
  double shape_a_ = 0.0;  // α, β, ε, or r depending on family
  double shape_b_ = 0.0;  // q for the piecewise family
  Index block_split_ = 0; // s for the piecewise family
  std::vector<double> values_;  // explicit eigenvalues
  std::string id_;

  // Finite dimensions: exact suffix sums over the whole range.
  // Infinite dimensions: suffix sums over the head [1, kEmAnchor] plus the
  // analytic tail beyond the anchor.
  std::vector<double> suffix_;
  std::vector<double> suffix_sq_;
  double tail_beyond_anchor_ = 0.0;
  double tail_sq_beyond_anchor_ = 0.0;
};

// Effective dimensions of a spectrum at sample size n:
//   k0 = min{l ≥ 0 : λ_{l+1} ≤ c0·(Σ_{i>l} λ_i)/n}
//   k1 = min{l ≥ 0 : λ_{l+1} ≤ c1·(Σ_{i>0} λ_i)/n}
// r_sigma = trace / λ_1.
struct EffectiveDims {
  Index k0 = 0;
  Index k1 = 0;
  double r_sigma = 0.0;
};

EffectiveDims effective_dims(const Spectrum& spectrum, Index n, double c0 = 1.0,
                             double c1 = 1.0);

// k2 = min{l ≥ 0 : Σ_{i>l} λ_i + n·λ_{l+1} ≤ c2·c_tn·Σ_{i>0} λ_i}.
// c_tn is the evaluated weighting function at the query point; the product
// c2·c_tn is what the scan threshold uses, so either factor may absorb slack.
// For finite dimension, `capped` reports that only l = p qualified.
struct K2Result {
  Index k2 = 0;
  bool capped = false;
};

K2Result k2_dim(const Spectrum& spectrum, Index n, double c2, double c_tn);

struct RateRow {
  Index n = 0;
  Index k0 = 0;
  Index k1 = 0;
  double r_sigma = 0.0;
};

// Effective dimensions across a strictly increasing grid of sample sizes.
// The factory is invoked once per n so that families whose length depends on
// n (constant, piecewise constant) are rebuilt accordingly.
std::vector<RateRow> rate_table(const std::function<Spectrum(Index)>& family_at,
                                std::span<const Index> n_grid, double c0 = 1.0,
                                double c1 = 1.0);

}  // namespace gdrisk
