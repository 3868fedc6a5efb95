#include <doctest.h>

#include <cmath>
#include <vector>

#include "gdrisk/errors.hpp"
#include "gdrisk/numerics.hpp"
#include "gdrisk/spectrum.hpp"

using namespace gdrisk;

namespace {

// Naive extended-precision tail sum, the oracle for every finite family.
long double naive_tail(const Spectrum& sp, Index k, Index p) {
  long double acc = 0.0L;
  for (Index i = p; i > k; --i) acc += static_cast<long double>(sp.eigenvalue(i));
  return acc;
}

}  // namespace

TEST_CASE("eigenvalues of the named families") {
  const Spectrum inv2 = Spectrum::inverse_polynomial(2.0, 1000);
  CHECK(inv2.eigenvalue(10) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(inv2.eigenvalue(1) == 1.0);

  const Spectrum ex = Spectrum::explicit_values({3.0, 2.0, 1.0});
  CHECK(ex.eigenvalue(1) == 3.0);
  CHECK(ex.eigenvalue(3) == 1.0);
  CHECK_THROWS_AS(ex.eigenvalue(4), std::out_of_range);
  CHECK_THROWS_AS(ex.eigenvalue(0), std::out_of_range);

  const Spectrum log2 = Spectrum::inverse_log_polynomial(2.0, 100);
  const double expected = 1.0 / (1.0 * std::pow(std::log(2.0), 2.0));
  CHECK(log2.eigenvalue(1) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(2.081).epsilon(1e-3));
}

TEST_CASE("family construction guards") {
  CHECK_THROWS_AS(Spectrum::inverse_polynomial(1.0), ConfigError);       // infinite trace
  CHECK_THROWS_AS(Spectrum::inverse_log_polynomial(1.0), ConfigError);   // infinite trace
  CHECK_NOTHROW(Spectrum::inverse_polynomial(1.0, 1000));                // finite is fine
  CHECK_THROWS_AS(Spectrum::explicit_values({1.0, 2.0}), ConfigError);   // increasing
  CHECK_THROWS_AS(Spectrum::explicit_values({1.0, 0.0}), ConfigError);   // non-positive
  CHECK_THROWS_AS(Spectrum::explicit_values({}), ConfigError);
  CHECK_THROWS_AS(Spectrum::piecewise_constant(0.5, 0.9, 100), ConfigError);  // q <= 1
}

TEST_CASE("finite tail sums match the naive loop") {
  const Spectrum inv2 = Spectrum::inverse_polynomial(2.0, 1000);
  const double oracle = static_cast<double>(naive_tail(inv2, 0, 1000));
  CHECK(inv2.tail_sum(0) == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(inv2.tail_sum(0) == doctest::Approx(1.64393).epsilon(1e-5));
  CHECK(inv2.tail_sum(17) == doctest::Approx(static_cast<double>(naive_tail(inv2, 17, 1000)))
                                 .epsilon(1e-14));

  const Spectrum ex = Spectrum::explicit_values({3.0, 2.0, 1.0});
  CHECK(ex.tail_sum(3) == 0.0);
  CHECK(ex.tail_sum(0) == 6.0);

  const Spectrum constant = Spectrum::constant_block(0.5, 100);
  CHECK(constant.dim() == 1000);  // ⌈100^1.5⌉
  CHECK(constant.tail_sum(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(constant.eigenvalue(1) == doctest::Approx(1e-3).epsilon(1e-14));
}

TEST_CASE("infinite tail sums agree with closed forms and straddle brackets") {
  const Spectrum inv2 = Spectrum::inverse_polynomial(2.0);
  const double zeta2 = 1.6449340668482264;  // π²/6
  CHECK(std::abs(inv2.tail_sum(0) - zeta2) < 1e-10);

  const Spectrum inv3 = Spectrum::inverse_polynomial(3.0);
  const double zeta3 = 1.2020569031595943;
  CHECK(std::abs(inv3.tail_sum(0) - zeta3) < 1e-10);
  CHECK(std::abs(inv3.tail_sum_squares(0) - (inv2.tail_sum(0) - 1.0) - 0.0) < 1.0);  // sanity: finite

  // ζ(4) = π⁴/90 checks the squared tails of 1/i².
  const double zeta4 = 1.0823232337111382;
  CHECK(std::abs(inv2.tail_sum_squares(0) - zeta4) < 1e-10);

  // Euler-Maclaurin anchors must agree with exact summation between them.
  for (double beta : {1.5, 2.0, 3.0}) {
    const Spectrum lg = Spectrum::inverse_log_polynomial(beta);
    CompensatedSum middle;
    const Index far = 300000;
    for (Index i = 11; i <= far; ++i) middle.add(lg.eigenvalue(i));
    CHECK(std::abs(lg.tail_sum(10) - middle.value() - lg.tail_sum(far)) < 1e-11);

    // Integral bracket around the tail beyond K.
    const Index big = 1000000;
    CompensatedSum partial;
    for (Index i = 1; i <= big; ++i) partial.add(lg.eigenvalue(i));
    const double lower = std::pow(std::log(static_cast<double>(big) + 2.0), 1.0 - beta) / (beta - 1.0);
    const double upper = lg.eigenvalue(big + 1) +
                         std::pow(std::log(static_cast<double>(big) + 1.0), 1.0 - beta) / (beta - 1.0);
    CHECK(lg.tail_sum(0) >= partial.value() + lower - 1e-9);
    CHECK(lg.tail_sum(0) <= partial.value() + upper + 1e-9);
  }
}

TEST_CASE("tail sum additivity") {
  const std::vector<Spectrum> specs = {
      Spectrum::inverse_polynomial(2.0), Spectrum::inverse_polynomial(1.5, 2000),
      Spectrum::inverse_log_polynomial(2.0), Spectrum::constant_block(0.5, 50),
      Spectrum::piecewise_constant(0.5, 2.0, 50)};
  for (const Spectrum& sp : specs) {
    for (Index k : {Index(0), Index(3), Index(40), Index(4095), Index(6000)}) {
      if (sp.finite() && k >= sp.dim()) continue;
      const double lhs = sp.tail_sum(k);
      const double rhs = sp.tail_sum(k + 1) + sp.eigenvalue(k + 1);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("effective dimensions: worked examples") {
  // Threshold 1.64393/100; the scan must stop exactly at l = 7.
  const Spectrum inv2 = Spectrum::inverse_polynomial(2.0, 1000);
  const EffectiveDims dims = effective_dims(inv2, 100, 1.0, 1.0);
  CHECK(dims.k1 == 7);
  CHECK(dims.r_sigma == doctest::Approx(inv2.trace()).epsilon(1e-14));  // λ_1 = 1

  for (Index n : {Index(10), Index(100), Index(1000)}) {
    const Spectrum constant = Spectrum::constant_block(0.5, n);
    const EffectiveDims cd = effective_dims(constant, n, 1.0, 1.0);
    CHECK(cd.k0 == 0);
    CHECK(cd.k1 == 0);
  }

  for (Index n : {Index(100), Index(400)}) {
    const Spectrum pw = Spectrum::piecewise_constant(0.5, 2.0, n);
    const EffectiveDims pd = effective_dims(pw, n, 1.0, 1.0);
    const Index s = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(n))));
    CHECK(pd.k0 == s);
    CHECK(pd.k1 == s);
  }
}

TEST_CASE("effective dimensions: scan consistency and properties") {
  const std::vector<Spectrum> specs = {
      Spectrum::inverse_polynomial(2.0), Spectrum::inverse_polynomial(3.0, 5000),
      Spectrum::inverse_log_polynomial(2.0), Spectrum::piecewise_constant(0.5, 2.0, 200)};
  for (const Spectrum& sp : specs) {
    for (Index n : {Index(50), Index(200), Index(1000)}) {
      const EffectiveDims dims = effective_dims(sp, n, 1.0, 1.0);
      const double nn = static_cast<double>(n);

      // The returned indices satisfy their definitions and are minimal.
      const double lam_k1_next =
          dims.k1 < sp.dim() ? sp.eigenvalue(dims.k1 + 1) : 0.0;
      CHECK(lam_k1_next <= sp.trace() / nn);
      if (dims.k1 > 0) CHECK(sp.eigenvalue(dims.k1) > sp.trace() / nn);

      const double lam_k0_next =
          dims.k0 < sp.dim() ? sp.eigenvalue(dims.k0 + 1) : 0.0;
      CHECK(lam_k0_next <= sp.tail_sum(dims.k0) / nn);
      if (dims.k0 > 0) CHECK(sp.eigenvalue(dims.k0) > sp.tail_sum(dims.k0 - 1) / nn);

      // With c0 = c1 the full-trace threshold is the easier one.
      CHECK(dims.k1 <= dims.k0);
    }
  }
}

TEST_CASE("effective dimensions: monotone in n and scale invariant") {
  const Spectrum inv2 = Spectrum::inverse_polynomial(2.0);
  Index prev_k0 = -1, prev_k1 = -1;
  for (Index n : {Index(10), Index(50), Index(100), Index(500), Index(2000)}) {
    const EffectiveDims dims = effective_dims(inv2, n, 1.0, 1.0);
    CHECK(dims.k0 >= prev_k0);
    CHECK(dims.k1 >= prev_k1);
    prev_k0 = dims.k0;
    prev_k1 = dims.k1;
  }

  std::vector<double> values;
  for (Index i = 1; i <= 400; ++i) values.push_back(std::pow(static_cast<double>(i), -1.7));
  std::vector<double> scaled = values;
  for (double& v : scaled) v *= 37.5;
  const Spectrum base = Spectrum::explicit_values(values);
  const Spectrum big = Spectrum::explicit_values(scaled);
  for (Index n : {Index(10), Index(100)}) {
    const EffectiveDims a = effective_dims(base, n, 1.0, 1.0);
    const EffectiveDims b = effective_dims(big, n, 1.0, 1.0);
    CHECK(a.k0 == b.k0);
    CHECK(a.k1 == b.k1);
    CHECK(a.r_sigma == doctest::Approx(b.r_sigma).epsilon(1e-12));
    CHECK(base.tail_rank(a.k0) == doctest::Approx(big.tail_rank(b.k0)).epsilon(1e-12));
  }
}

TEST_CASE("k2: worked examples and ordering against k1") {
  CHECK(k2_dim(Spectrum::explicit_values({1.0}), 1, 2.0, 1.0).k2 == 0);

  // A threshold past trace + n·λ_1 is met at l = 0 for any spectrum.
  const Spectrum inv2 = Spectrum::inverse_polynomial(2.0, 1000);
  const double huge = inv2.trace() * (1.0 + 100.0 * 1.0 / inv2.trace()) + 1.0;
  CHECK(k2_dim(inv2, 100, 1.0, huge / inv2.trace()).k2 == 0);

  // Scan-consistency at the returned index.
  const K2Result r = k2_dim(inv2, 100, 1.0, 1.0);
  const double threshold = 1.0 * 1.0 * inv2.trace();
  CHECK(inv2.tail_sum(r.k2) + 100.0 * (r.k2 < 1000 ? inv2.eigenvalue(r.k2 + 1) : 0.0) <=
        threshold);
  if (r.k2 > 0) {
    CHECK(inv2.tail_sum(r.k2 - 1) + 100.0 * inv2.eigenvalue(r.k2) > threshold);
  }

  // With constant c(t,n) and c2 = c1 + 1, k2 never exceeds k1.
  const std::vector<Spectrum> specs = {
      Spectrum::inverse_polynomial(2.0), Spectrum::inverse_polynomial(3.0),
      Spectrum::inverse_log_polynomial(2.0), Spectrum::inverse_log_polynomial(3.0),
      Spectrum::constant_block(0.5, 100), Spectrum::piecewise_constant(0.5, 2.0, 100)};
  for (const Spectrum& sp : specs) {
    for (Index n : {Index(50), Index(100), Index(400)}) {
      const Spectrum local = sp;  // constant/piecewise were built at n=100; still valid spectra
      const EffectiveDims dims = effective_dims(local, n, 1.0, 1.0);
      const K2Result k2 = k2_dim(local, n, 2.0, 1.0);
      CHECK(k2.k2 <= dims.k1);
    }
  }
}

TEST_CASE("rate table: asymptotic orders of k1") {
  const std::vector<Index> grid = {100, 400, 1600, 6400};

  const auto inv2_at = [](Index) { return Spectrum::inverse_polynomial(2.0); };
  const auto rows2 = rate_table(inv2_at, grid);
  double lo = 1e300, hi = 0.0;
  for (const RateRow& row : rows2) {
    const double ratio = static_cast<double>(row.k1) / std::sqrt(static_cast<double>(row.n));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(hi / lo < 1.6);  // k1 ~ √n up to integer steps

  const auto log2_at = [](Index) { return Spectrum::inverse_log_polynomial(2.0); };
  const auto rows_log = rate_table(log2_at, grid);
  lo = 1e300;
  hi = 0.0;
  for (const RateRow& row : rows_log) {
    const double ln = std::log(static_cast<double>(row.n));
    const double ratio = static_cast<double>(row.k1) * ln * ln / static_cast<double>(row.n);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(hi / lo < 2.0);

  const auto const_at = [](Index n) { return Spectrum::constant_block(0.5, n); };
  for (const RateRow& row : rate_table(const_at, grid)) CHECK(row.k1 == 0);

  CHECK_THROWS_AS(rate_table(inv2_at, std::vector<Index>{100, 100}), std::invalid_argument);
}

TEST_CASE("rate table: k1/n eventually decreases for fixed families") {
  const std::vector<Index> grid = {50, 100, 200, 400, 800, 1600, 3200};
  for (const auto& family : {Spectrum::inverse_polynomial(2.0), Spectrum::inverse_polynomial(3.0),
                             Spectrum::inverse_log_polynomial(2.0),
                             Spectrum::inverse_log_polynomial(3.0)}) {
    const auto rows = rate_table([&](Index) { return family; }, grid);
    for (std::size_t i = 2; i < rows.size(); ++i) {
      const double prev = static_cast<double>(rows[i - 1].k1) / static_cast<double>(rows[i - 1].n);
      const double curr = static_cast<double>(rows[i].k1) / static_cast<double>(rows[i].n);
      CHECK(curr < prev);
    }
  }
}

TEST_CASE("scan diagnostics name the spectrum") {
  // Geometric decay keeps tail/λ ratios bounded, so the k0 threshold is never
  // met at large n; the scan must fail loudly instead of fabricating an index.
  std::vector<double> geo;
  double v = 1.0;
  for (int i = 0; i < 60; ++i) {
    geo.push_back(v);
    v *= 0.5;
  }
  const Spectrum sp = Spectrum::explicit_values(geo);
  // Finite dimension always terminates (λ beyond p is zero), so k0 = p here.
  CHECK(effective_dims(sp, 1000, 1.0, 1.0).k0 == sp.dim());
}
