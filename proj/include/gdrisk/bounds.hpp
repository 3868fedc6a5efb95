#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gdrisk/instance.hpp"
#include "gdrisk/spectrum.hpp"

namespace gdrisk {

// Weighting function c(t, n) that trades the k2 variance term against the
// t²-growth term: either a fixed positive constant or the power law n^{-β}.
struct CtnStrategy {
  enum class Kind { kConstant, kPowerLaw };

  Kind kind = Kind::kConstant;
  double value = 1.0;  // the constant, or the exponent β

  static CtnStrategy constant(double v);
  static CtnStrategy power_law(double beta);

  double operator()(Index n) const;
};

// Knobs shared by the bound evaluators. Implicit constants from the analysis
// are set to 1 and exposed as a single multiplier per bound; the defaults
// bind δ, σ_y and ‖θ*‖ to the instance the bound describes.
struct BoundParams {
  double delta = 0.05;
  double sigma_y = 1.0;
  double theta_norm = 1.0;
  double c0 = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double bias_multiplier = 1.0;
  double variance_multiplier = 1.0;
};

// Bias bound ‖θ*‖²(1/(λt) + ‖Σ‖·max{√(r/n), r/n, √(log(1/δ)/n), log(1/δ)/n}).
// The fourth max element is dominated whenever log(1/δ) ≤ n but is kept for
// fidelity to the full statement behind the displayed bound. t = 0 returns
// +infinity (the 1/(λt) term), documented sentinel.
double bias_bound(const Spectrum& spectrum, Index n, double lr, Index t,
                  const BoundParams& params = {});

// Variance bound σ_y²·log(1/δ)·(k1/n + k2/(c(t,n)·n) + c(t,n)·(λt/n·ΣΛ)²)
// with k1 from the effective-dimension scan and k2 at threshold c2·c(t,n).
double variance_bound(const Spectrum& spectrum, Index n, double lr, Index t,
                      const CtnStrategy& ctn, const BoundParams& params = {});

// Explicit decomposition matrices on small instances (p ≤ 200):
//   B = (I − (λ/n)XᵀX)^t Σ (I − (λ/n)XᵀX)^t
//   C = (XXᵀ)⁻¹[I − (I−(λ/n)XXᵀ)^t] XΣXᵀ [I − (I−(λ/n)XXᵀ)^t](XXᵀ)⁻¹
// such that R(θ_t) ≤ θ*ᵀBθ* + εᵀCε pointwise on the sampled instance.
struct BcMatrices {
  Eigen::MatrixXd b;
  Eigen::MatrixXd c;
  double bias_value = 0.0;      // θ*ᵀBθ*
  double variance_trace = 0.0;  // trace(C)
};

BcMatrices explicit_bc_matrices(const SampledDataset& ds, const Spectrum& spectrum,
                                const Eigen::VectorXd& theta_star, double lr, Index t);

// Last-iterate and one-pass comparison bounds, implicit constants 1:
//   bartlett = k0/n + n/R_{k0}(Σ)
//   zou      = k1/n + n·Σ_{i>k1}λ_i² / (Σ_{i>0}λ_i)²
struct ComparisonBounds {
  double bartlett = 0.0;
  double zou = 0.0;
};

ComparisonBounds comparison_bounds(const Spectrum& spectrum, Index n, double c0 = 1.0,
                                   double c1 = 1.0);

struct BoundCurvePoint {
  Index t = 0;
  double bias = 0.0;
  double variance = 0.0;
  double total = 0.0;
  Index k2 = 0;
};

std::vector<BoundCurvePoint> bound_curve(const Spectrum& spectrum, Index n, double lr,
                                         std::span<const Index> t_grid, const CtnStrategy& ctn,
                                         const BoundParams& params = {});

// Everything the bound evaluators say about one configuration: the per-epoch
// curve plus the effective dimensions and comparison-bound scalars it was
// computed from. With the weightings implemented here (constant and n^{-β}),
// k2 is epoch-independent, so the curve repeats one value in its k2 column.
struct BoundReport {
  std::vector<BoundCurvePoint> curve;
  Index k0 = 0;
  Index k1 = 0;
  double r_sigma = 0.0;
  double bartlett_bound = 0.0;
  double zou_bound = 0.0;
  BoundParams params;
};

BoundReport make_bound_report(const Spectrum& spectrum, Index n, double lr,
                              std::span<const Index> t_grid, const CtnStrategy& ctn,
                              const BoundParams& params = {});

// Scans the bias+variance bound over an epoch grid that must bracket its
// U-shape (decreasing at the start, increasing at the end, else a
// grid-too-narrow error).
//
// Two distinguished epochs are reported. `argmin_total` minimizes the sum
// bias+variance on the grid; calculus on the displayed terms puts it at
// t ∝ (n²·‖θ*‖²/λ³)^{1/3}, past the point where the bias floor is reached.
// `balance_t` is the first epoch where the variance bound overtakes the bias
// bound — the Θ(√n/λ) epoch the analysis stops at, and the operational
// early-stopping scale. `target` is the closed-form reference
// max{√r, 1}/√n + max{k1, 1}/n.
struct MinBoundResult {
  Index argmin_total = 0;
  double min_total = 0.0;
  Index balance_t = 0;
  double balance_value = 0.0;
  double target = 0.0;
};

MinBoundResult min_bound_over_t(const Spectrum& spectrum, Index n, double lr,
                                std::span<const Index> t_grid, const CtnStrategy& ctn,
                                const BoundParams& params = {});

}  // namespace gdrisk
