#include "gdrisk/instance.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "gdrisk/errors.hpp"
#include "gdrisk/rng.hpp"

namespace gdrisk {

namespace {

constexpr double kRankTolerance = 1e-12;

// Stream index reserved for target-vector draws; trial streams use indices
// 0, 1, 2, ... so this can never collide.
constexpr std::uint64_t kThetaStreamIndex = std::numeric_limits<std::uint64_t>::max();

}  // namespace

void ProblemInstance::validate() const {
  if (n < 1) throw ConfigError("instance: n must be positive");
  if (p <= n) throw ConfigError("instance: need p > n (overparameterized regime)");
  if (!spectrum.finite() || spectrum.dim() != p) {
    throw ConfigError("instance: spectrum dimension must equal p");
  }
  if (theta_star.size() != p) throw ConfigError("instance: theta_star must have length p");
  if (!theta_star.allFinite()) throw ConfigError("instance: theta_star must be finite");
  if (!(noise_sigma >= 0.0)) throw ConfigError("instance: noise_sigma must be >= 0");
}

Eigen::VectorXd default_theta_star(Index p) {
  Eigen::VectorXd v(p);
  for (Index i = 0; i < p; ++i) v[i] = 1.0 / static_cast<double>(i + 1);
  v /= v.norm();
  return v;
}

Eigen::VectorXd basis_theta_star(Index p) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  v[0] = 1.0;
  return v;
}

Eigen::VectorXd random_theta_star(Index p, double norm, std::uint64_t master_seed) {
  RngStream rng = RngStream::for_stream(master_seed, kThetaStreamIndex);
  Eigen::VectorXd v(p);
  for (Index i = 0; i < p; ++i) v[i] = rng.normal();
  v *= norm / v.norm();
  return v;
}

SampledDataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXd y, Eigen::VectorXd epsilon,
                            std::uint64_t seed) {
  const Index n = x.rows();

  const Eigen::MatrixXd gram = x * x.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw NumericError("gram eigendecomposition failed (seed " + std::to_string(seed) + ")");
  }

  SampledDataset ds;
  ds.x = std::move(x);
  ds.y = std::move(y);
  ds.epsilon = std::move(epsilon);

  // Eigen returns ascending order; flip to μ_1 ≥ ... ≥ μ_n.
  ds.svd.mu.resize(n);
  ds.svd.u.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    ds.svd.mu[i] = solver.eigenvalues()[n - 1 - i];
    ds.svd.u.col(i) = solver.eigenvectors().col(n - 1 - i);
  }

  if (!(ds.svd.mu[n - 1] > kRankTolerance * ds.svd.mu[0])) {
    throw RankDeficientError("sampled design matrix is numerically rank deficient (seed " +
                             std::to_string(seed) + ")");
  }

  ds.svd.w = ds.x.transpose() *
             (ds.svd.u * ds.svd.mu.cwiseSqrt().cwiseInverse().asDiagonal());
  return ds;
}

SampledDataset sample_dataset(const ProblemInstance& inst, std::uint64_t seed) {
  inst.validate();
  RngStream rng(seed);

  const Eigen::VectorXd scale = inst.spectrum.leading(inst.p).cwiseSqrt();
  Eigen::MatrixXd x(inst.n, inst.p);
  if (inst.feature_law == FeatureLaw::kGaussian) {
    for (Index i = 0; i < inst.n; ++i)
      for (Index j = 0; j < inst.p; ++j) x(i, j) = scale[j] * rng.normal();
  } else {
    for (Index i = 0; i < inst.n; ++i)
      for (Index j = 0; j < inst.p; ++j) x(i, j) = scale[j] * rng.rademacher();
  }

  Eigen::VectorXd epsilon(inst.n);
  for (Index i = 0; i < inst.n; ++i) epsilon[i] = inst.noise_sigma * rng.normal();

  Eigen::VectorXd y = x * inst.theta_star + epsilon;
  return make_dataset(std::move(x), std::move(y), std::move(epsilon), seed);
}

double exact_risk(const Spectrum& spectrum, const Eigen::VectorXd& theta,
                  const Eigen::VectorXd& theta_star) {
  if (theta.size() != theta_star.size()) {
    throw std::invalid_argument("exact_risk: parameter length mismatch");
  }
  if (!spectrum.finite() || spectrum.dim() != theta.size()) {
    throw std::invalid_argument("exact_risk: spectrum dimension must match parameters");
  }
  const Eigen::VectorXd lambda = spectrum.leading(theta.size());
  const Eigen::ArrayXd d = (theta - theta_star).array();
  return 0.5 * (lambda.array() * d.square()).sum();
}

std::vector<SpreadRow> eigen_spread_check(const SampledDataset& ds, const Spectrum& spectrum,
                                          Index n, double c0) {
  const EffectiveDims dims = effective_dims(spectrum, n, c0, c0);
  std::vector<Index> probes = {0, dims.k0, n - 1};
  std::vector<SpreadRow> rows;
  for (Index k : probes) {
    if (k < 0 || k >= n) continue;
    SpreadRow row;
    row.k = k;
    row.mu = ds.svd.mu[k];
    const double lam = k < spectrum.dim() ? spectrum.eigenvalue(k + 1) : 0.0;
    row.reference = spectrum.tail_sum(k) + lam * static_cast<double>(n);
    row.ratio = row.mu / row.reference;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gdrisk
