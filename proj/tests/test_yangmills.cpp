#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <vector>

#include "charex/measures.hpp"
#include "charex/symfun.hpp"
#include "charex/yangmills.hpp"
#include "doctest.h"

using namespace charex;

namespace {

double brute_ones(double T, int N, double r, std::int64_t K) {
  const double t = T / N;
  double z = 0.0;
  for (const auto& s : enumerate_shapes(K, N))
    z += std::pow(r, static_cast<double>(s.boxes())) *
         std::exp(2.0 * log_dim_shape(s, N) - 0.5 * t * static_cast<double>(casimir_c2(s, N)));
  return std::log(z);
}

double modal_g(const YoungShape& s, double T, int N) {
  return 2.0 * log_dim_shape(s, N) -
         0.5 * (T / N) * static_cast<double>(casimir_c2(s, N));
}

}  // namespace

TEST_CASE("yangmills: input validation") {
  SpectrumSet A({0.2, 0.5}), B({0.3, 0.6});
  CHECK_THROWS_AS(ym_partition(A, B, -1.0, 2, 10), UsageError);
  CHECK_THROWS_AS(ym_partition(A, B, std::nan(""), 2, 10), UsageError);
  CHECK_THROWS_AS(ym_partition(A, B, 1.0, 3, 10), UsageError);
  CHECK_THROWS_AS(ym_partition(A, B, 1.0, 2, -1), UsageError);
  CHECK_THROWS_AS(ym_partition(SpectrumSet({0.2, 1.5}), B, 1.0, 2, 10), HypothesisViolation);
  CHECK_THROWS_AS(ym_partition(SpectrumSet({-0.1, 0.5}), B, 1.0, 2, 10), HypothesisViolation);
  // max(A) max(B) = 1 is outside the truncation certificate's radius
  SpectrumSet I2 = SpectrumSet::constant(2, 1.0);
  CHECK_THROWS_AS(ym_partition(I2, I2, 1.0, 2, 10), RadiusViolation);
  CHECK_THROWS_AS(ym_log_partition_ones(1.0, 2, 0.0), HypothesisViolation);
  CHECK_THROWS_AS(ym_log_partition_ones(1.0, 2, 1.5), HypothesisViolation);
  CHECK_THROWS_AS(ym_log_partition_ones(0.0, 2, 1.0), RadiusViolation);
  CHECK_THROWS_AS(ym_free_energy_enclosure(0.0, 4), UsageError);
  CHECK_THROWS_AS(ym_log_partition_exact(SpectrumSet({0.3, 0.3 + 1e-12}), B, 1.0, 2),
                  DegenerateSpectrum);
  DiscreteMeasure d1 = DiscreteMeasure::dirac(1.0);
  CHECK_THROWS_AS(ym_free_energy_trend(d1, d1, 0.0, {4}), UsageError);
  CHECK_THROWS_AS(ym_free_energy_trend(d1, d1, 1.0, {}), EmptyInput);
  CHECK_THROWS_AS(ym_free_energy_trend(DiscreteMeasure::dirac(1.5), d1, 1.0, {4}),
                  HypothesisViolation);
}

TEST_CASE("yangmills: N=1 scalar oracle sum_k (ab)^k e^{-(T/2)k^2}") {
  const double a = 0.4, b = 0.7, T = 0.8;
  double z = 0.0;
  for (int k = 0; k < 400; ++k) z += std::pow(a * b, k) * std::exp(-0.5 * T * k * k);
  SpectrumSet A({a}), B({b});
  const YmValue v = ym_partition(A, B, T, 1, 60);
  CHECK(std::log(v.value) == doctest::Approx(std::log(z)).epsilon(1e-14));
  CHECK(v.tail_bound < 1e-20);
  CHECK(ym_log_partition_exact(A, B, T, 1) == doctest::Approx(std::log(z)).epsilon(1e-13));
  // at N=1 the ones route is the same scalar series with r = a b
  CHECK(ym_log_partition_ones(T, 1, a * b) == doctest::Approx(std::log(z)).epsilon(1e-13));
}

TEST_CASE("yangmills: T=0 collapses to the Cauchy product") {
  SpectrumSet A({0.1, 0.2, 0.3}), B({0.05, 0.15, 0.25});
  const double lcp = std::log(cauchy_product(A.values(), B.values()));
  const YmValue v = ym_partition(A, B, 0.0, 3, 40);
  CHECK(std::abs(v.value - std::exp(lcp)) <= v.tail_bound + 1e-13);
  CHECK(ym_log_partition_exact(A, B, 0.0, 3) == lcp);  // same closed form
  // constant spectra: (1 - r)^{-N^2}
  CHECK(ym_log_partition_ones(0.0, 3, 0.36) == doctest::Approx(-9.0 * std::log(0.64)).epsilon(1e-15));
}

TEST_CASE("yangmills: truncated sum brackets the exact determinant route") {
  SpectrumSet A({0.2, 0.5, 0.8}), B({0.3, 0.6, 0.9});
  const double T = 3.0;
  const YmValue tr = ym_partition(A, B, T, 3, 55);
  const double le = ym_log_partition_exact(A, B, T, 3);
  // all terms are positive: truncation can only undershoot, by at most the tail
  CHECK(le >= std::log(tr.value) - 1e-12);
  CHECK(le - std::log(tr.value) <= tr.tail_bound / tr.value + 1e-12);
}

TEST_CASE("yangmills: ones route agrees with branching and with brute force") {
  // constant spectra v I vs the Hankel route with r = v^2
  SpectrumSet C2 = SpectrumSet::constant(2, 0.5);
  const YmValue tr = ym_partition(C2, C2, 2.0, 2, 45);
  const double lo = ym_log_partition_ones(2.0, 2, 0.25);
  CHECK(lo == doctest::Approx(std::log(tr.value)).epsilon(1e-12));
  CHECK(std::exp(lo) - tr.value <= tr.tail_bound + 1e-12);
  CHECK(std::exp(lo) >= tr.value - 1e-12);
  // N=3 against a direct sum over shapes via log_dim_shape
  CHECK(ym_log_partition_ones(1.5, 3, 0.2) ==
        doctest::Approx(brute_ones(1.5, 3, 0.2, 80)).epsilon(1e-12));
}

TEST_CASE("yangmills: monotonicity, symmetry, and edge cases") {
  SpectrumSet A({0.2, 0.4}), B({0.3, 0.5});
  SUBCASE("value nonincreasing in T, nondecreasing in K, tail shrinks in K") {
    double prev = 1e300;
    for (double T : {0.0, 0.5, 1.0, 2.0, 5.0}) {
      const double v = ym_partition(A, B, T, 2, 30).value;
      CHECK(v <= prev + 1e-15);
      prev = v;
    }
    const YmValue v10 = ym_partition(A, B, 1.0, 2, 10);
    const YmValue v20 = ym_partition(A, B, 1.0, 2, 20);
    CHECK(v20.value >= v10.value);
    CHECK(v20.tail_bound < v10.tail_bound);
    // true remainder is below the certified bound
    const YmValue v40 = ym_partition(A, B, 1.0, 2, 40);
    CHECK(v40.value - v10.value <= v10.tail_bound);
  }
  SUBCASE("K = 0 keeps only the empty shape") {
    CHECK(ym_partition(A, B, 1.0, 2, 0).value == 1.0);
  }
  SUBCASE("(A, B) symmetry") {
    CHECK(ym_partition(A, B, 1.3, 2, 25).value == ym_partition(B, A, 1.3, 2, 25).value);
    CHECK(ym_log_partition_exact(A, B, 1.3, 2) ==
          doctest::Approx(ym_log_partition_exact(B, A, 1.3, 2)).epsilon(1e-12));
  }
  SUBCASE("huge T freezes the sum at the empty shape") {
    CHECK(std::abs(ym_partition(A, B, 1e3, 2, 30).value - 1.0) <= 1e-10);
    CHECK(std::abs(ym_log_partition_exact(A, B, 1e3, 2)) <= 1e-10);
  }
  SUBCASE("determinism") {
    CHECK(ym_partition(A, B, 0.7, 2, 35).value == ym_partition(A, B, 0.7, 2, 35).value);
    CHECK(ym_log_partition_ones(0.7, 4, 1.0) == ym_log_partition_ones(0.7, 4, 1.0));
  }
}

TEST_CASE("yangmills: ym_choose_k returns the minimal certified cutoff") {
  SpectrumSet A({0.2, 0.4}), B({0.3, 0.5});
  const double tol = 1e-6;
  const std::int64_t K = ym_choose_k(A, B, tol);
  CHECK(cauchy_tail_bound(A.values(), B.values(), K) <= tol);
  REQUIRE(K > 0);
  CHECK(cauchy_tail_bound(A.values(), B.values(), K - 1) > tol);
  // radius too close to 1: no K <= cap certifies
  SpectrumSet H = SpectrumSet::constant(2, 0.999);
  CHECK_THROWS_AS(ym_choose_k(H, H, 1e-6, 60), TailNotCertified);
  CHECK_THROWS_AS(ym_choose_k(A, SpectrumSet({0.3, 0.5, 0.7}), 1e-6, 60), UsageError);
}

TEST_CASE("yangmills: Casimir is nonnegative with C2(1^k) = k(N+1-k)") {
  const int N = 6;
  for (const auto& s : enumerate_shapes(12, N)) CHECK(casimir_c2(s, N) >= 0);
  for (int k = 1; k <= N; ++k) {
    const YoungShape col(std::vector<std::int64_t>(k, 1));
    CHECK(casimir_c2(col, N) == static_cast<std::int64_t>(k) * (N + 1 - k));
  }
}

TEST_CASE("yangmills: frozen per-N free energies at T = 1 (ones route)") {
  CHECK(ym_log_partition_ones(1.0, 4, 1.0) / 16.0 ==
        doctest::Approx(0.53979543464310376).epsilon(1e-10));
  CHECK(ym_log_partition_ones(1.0, 8, 1.0) / 64.0 ==
        doctest::Approx(0.53884811610415606).epsilon(1e-10));
  CHECK(ym_log_partition_ones(1.0, 16, 1.0) / 256.0 ==
        doctest::Approx(0.53861636303806537).epsilon(1e-10));
}

TEST_CASE("yangmills: enclosure is rigorous and the modal climb is optimal") {
  SUBCASE("climb matches exhaustive maximization at small N") {
    for (int N : {3, 4}) {
      double best = 0.0;
      YoungShape arg;
      for (const auto& s : enumerate_shapes(90, N)) {
        const double g = modal_g(s, 1.0, N);
        if (g > best) {
          best = g;
          arg = s;
        }
      }
      const YmEnclosure enc = ym_free_energy_enclosure(1.0, N);
      CHECK(enc.lower == best / (static_cast<double>(N) * N));
      CHECK(enc.modal == arg);
    }
  }
  SUBCASE("frozen ends and modal shape") {
    const YmEnclosure e4 = ym_free_energy_enclosure(1.0, 4);
    CHECK(e4.lower == doctest::Approx(0.35208030282616309).epsilon(1e-10));
    CHECK(e4.upper == doctest::Approx(1.509744948072832).epsilon(1e-10));
    CHECK(e4.modal == YoungShape({4, 2, 1}));
    const YmEnclosure e16 = ym_free_energy_enclosure(1.0, 16);
    CHECK(e16.lower == doctest::Approx(0.48541203679709299).epsilon(1e-10));
    CHECK(e16.upper == doctest::Approx(2.7371365103114926).epsilon(1e-10));
    CHECK(e16.modal == YoungShape({22, 19, 16, 14, 12, 10, 8, 6, 5, 3, 2, 1}));
    // local maximality of the reported modal shape
    for (const auto& m : corner_moves(e16.modal, 16))
      CHECK(modal_g(m, 1.0, 16) <= modal_g(e16.modal, 1.0, 16));
  }
  SUBCASE("free energy sits inside the enclosure") {
    for (int N : {4, 8, 16}) {
      const YmEnclosure enc = ym_free_energy_enclosure(1.0, N);
      const double fe = ym_log_partition_ones(1.0, N, 1.0) / (static_cast<double>(N) * N);
      CHECK(enc.lower < enc.upper);
      CHECK(fe >= enc.lower);
      CHECK(fe <= enc.upper);
    }
  }
}

TEST_CASE("yangmills: free-energy trend for delta_1 marginals at T = 1") {
  const DiscreteMeasure d1 = DiscreteMeasure::dirac(1.0);
  const auto rows = ym_free_energy_trend(d1, d1, 1.0, {4, 8, 16});
  REQUIRE(rows.size() == 3);
  const double fe_frozen[3] = {0.53979543464310376, 0.53884811610415606, 0.53861636303806537};
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rows[i].free_energy == doctest::Approx(fe_frozen[i]).epsilon(1e-10));
    // one-atom marginals: the continuum bracket collapses to a point
    CHECK(rows[i].continuum_hi - rows[i].continuum_lo <= 1e-12);
    // continuum variational value lies below the per-N free energy
    CHECK(rows[i].continuum_hi <= rows[i].free_energy);
    // per-N value inside the rigorous finite-N enclosure
    CHECK(rows[i].variational_lo <= rows[i].free_energy);
    CHECK(rows[i].free_energy <= rows[i].variational_hi);
    CHECK(rows[i].gap == 0.0);
  }
  // the LDP convergence gap shrinks monotonically in N
  const double g4 = rows[0].free_energy - rows[0].continuum_hi;
  const double g8 = rows[1].free_energy - rows[1].continuum_hi;
  const double g16 = rows[2].free_energy - rows[2].continuum_hi;
  CHECK(g4 > g8);
  CHECK(g8 > g16);
  CHECK(rows[2].continuum_hi == doctest::Approx(0.23782567251668052).epsilon(1e-8));
}

TEST_CASE("yangmills: trend routes and the general-marginal paths") {
  SUBCASE("small-radius marginals take the certified truncated route") {
    const DiscreteMeasure mu_a({0.3, 0.6}, {0.5, 0.5});
    const DiscreteMeasure mu_b({0.25, 0.5}, {0.5, 0.5});
    const auto rows = ym_free_energy_trend(mu_a, mu_b, 1.0, {4});
    REQUIRE(rows.size() == 1);
    SpectrumSet A(paper_quantiles(mu_a, 4)), B(paper_quantiles(mu_b, 4));
    const std::int64_t K = ym_choose_k(A, B, 1e-6, 60);
    const double fe = std::log(ym_partition(A, B, 1.0, 4, K).value) / 16.0;
    CHECK(rows[0].free_energy == fe);
    // non-constant spectra: variational fields alias the continuum bracket
    CHECK(rows[0].variational_lo == rows[0].continuum_lo);
    CHECK(rows[0].variational_hi == rows[0].continuum_hi);
    CHECK(rows[0].gap == std::max(0.0, std::max(rows[0].variational_lo - fe,
                                                fe - rows[0].variational_hi)));
  }
  SUBCASE("constant near-critical marginals fall back to the Hankel route") {
    const DiscreteMeasure d99 = DiscreteMeasure::dirac(0.99);
    const auto rows = ym_free_energy_trend(d99, d99, 1.0, {4});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].free_energy == ym_log_partition_ones(1.0, 4, 0.99 * 0.99) / 16.0);
  }
}

TEST_CASE("yangmills: T=0 per-N value is the two-point quadrature of -log(1-xy)") {
  // atoms realize evenly at N = 8 (four quantile points each), so
  // N^{-2} sum_{ij} -log(1 - a_i b_j) = sum_{pq} w_p w_q (-log(1 - x_p y_q))
  const std::vector<double> xs{0.3, 0.6}, ys{0.2, 0.5};
  const DiscreteMeasure mu_a(xs, {0.5, 0.5}), mu_b(ys, {0.5, 0.5});
  SpectrumSet A(paper_quantiles(mu_a, 8)), B(paper_quantiles(mu_b, 8));
  double expected = 0.0;
  for (double x : xs)
    for (double y : ys) expected += 0.25 * (-std::log1p(-x * y));
  const double fe = ym_log_partition_exact(A, B, 0.0, 8) / 64.0;
  CHECK(fe == doctest::Approx(expected).epsilon(1e-13));
}
