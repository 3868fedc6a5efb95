#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace gdrisk {

// Compensated (Neumaier) summation; keeps long spectral sums accurate to
// a few ulps regardless of term count.
class CompensatedSum {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      comp_ += (sum_ - t) + value;
    } else {
      comp_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Composite 16-point Gauss-Legendre quadrature on [a, b]. Intended for
// smooth, rapidly decaying integrands; `panels` subdivisions of equal width.
template <class F>
double integrate(F&& f, double a, double b, int panels = 32) {
  // Abscissas/weights for the positive half of the 16-point rule.
  static constexpr double kNodes[8] = {
      0.0950125098376374401853193, 0.2816035507792589132304605,
      0.4580167776572273863424194, 0.6178762444026437484466718,
      0.7554044083550030338951012, 0.8656312023878317438804679,
      0.9445750230732325760779884, 0.9894009349916499325961542};
  static constexpr double kWeights[8] = {
      0.1894506104550684962853967, 0.1826034150449235888667637,
      0.1691565193950025381893121, 0.1495959888165767320815017,
      0.1246289712555338720524763, 0.0951585116824927848099251,
      0.0622535239386478928628438, 0.0271524594117540948517806};
  const double width = (b - a) / panels;
  CompensatedSum acc;
  for (int k = 0; k < panels; ++k) {
    const double mid = a + (k + 0.5) * width;
    const double half = 0.5 * width;
    for (int j = 0; j < 8; ++j) {
      const double dx = half * kNodes[j];
      acc.add(kWeights[j] * half * (f(mid - dx) + f(mid + dx)));
    }
  }
  return acc.value();
}

// (1 - x)^t for x in [0, 1), integer t >= 0, evaluated as exp(t*log1p(-x))
// so that huge epoch counts stay accurate.
inline double contraction_power(double x, std::int64_t t) {
  if (t == 0) return 1.0;
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  return std::exp(static_cast<double>(t) * std::log1p(-x));
}

// Least-squares slope of log(y) against log(x).
inline double log_log_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("log_log_slope: need two or more matched points");
  }
  const std::size_t m = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw std::invalid_argument("log_log_slope: points must be positive");
    }
    const double lx = std::log(xs[i]);
    const double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = m * sxx - sx * sx;
  return (m * sxy - sx * sy) / denom;
}

inline double mean_of(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  return values.empty() ? 0.0 : acc.value() / static_cast<double>(values.size());
}

// Sample standard deviation (n-1 denominator); zero for fewer than two values.
inline double sample_sd(std::span<const double> values) {
  const std::size_t m = values.size();
  if (m < 2) return 0.0;
  const double mu = mean_of(values);
  CompensatedSum acc;
  for (double v : values) acc.add((v - mu) * (v - mu));
  return std::sqrt(acc.value() / static_cast<double>(m - 1));
}

}  // namespace gdrisk
