#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "gdrisk/spectrum.hpp"

namespace gdrisk {

enum class FeatureLaw { kGaussian, kRademacher };

// One concrete overparameterized regression task: rows are sampled as
// x = Λ^{1/2} z with z i.i.d. unit-variance entries of the chosen law, and
// responses are y = xᵀθ* + ε with Gaussian noise of scale noise_sigma.
struct ProblemInstance {
  Spectrum spectrum;
  Index n = 0;
  Index p = 0;
  Eigen::VectorXd theta_star;
  double noise_sigma = 1.0;
  FeatureLaw feature_law = FeatureLaw::kGaussian;

  void validate() const;
};

// Deterministic unit-norm target with coordinates proportional to 1/i.
Eigen::VectorXd default_theta_star(Index p);

// First standard basis vector.
Eigen::VectorXd basis_theta_star(Index p);

// Isotropic random direction of the given norm; drawn from a stream reserved
// off the master seed so it is independent of all trial streams.
Eigen::VectorXd random_theta_star(Index p, double norm, std::uint64_t master_seed);

// Thin factorization X = U·diag(√μ)·Wᵀ of a wide design matrix, computed from
// the n×n Gram matrix (O(n²p) instead of O(np²)).
struct SvdParts {
  Eigen::MatrixXd u;   // n×n orthogonal
  Eigen::VectorXd mu;  // squared singular values, μ_1 ≥ ... ≥ μ_n > 0
  Eigen::MatrixXd w;   // p×n with orthonormal columns
};

struct SampledDataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd epsilon;
  SvdParts svd;

  Index n() const { return x.rows(); }
  Index p() const { return x.cols(); }
};

// Factorizes an existing design; throws RankDeficientError (echoing `seed`)
// when μ_n ≤ 1e-12·μ_1.
SampledDataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXd y, Eigen::VectorXd epsilon,
                            std::uint64_t seed);

// Samples a dataset; deterministic for a fixed seed regardless of execution
// parallelism.
SampledDataset sample_dataset(const ProblemInstance& inst, std::uint64_t seed);

// Exact excess risk ½·Σ_i λ_i (θ_i − θ*_i)² in the covariance eigenbasis.
double exact_risk(const Spectrum& spectrum, const Eigen::VectorXd& theta,
                  const Eigen::VectorXd& theta_star);

// Ratios μ_{k+1} / (Σ_{i>k} λ_i + λ_{k+1}·n) at k ∈ {0, k0, n-1}; a sanity
// check that sampled Gram eigenvalues stay within a modest constant of the
// spectral reference.
struct SpreadRow {
  Index k = 0;
  double mu = 0.0;
  double reference = 0.0;
  double ratio = 0.0;
};

std::vector<SpreadRow> eigen_spread_check(const SampledDataset& ds, const Spectrum& spectrum,
                                          Index n, double c0 = 1.0);

}  // namespace gdrisk
