#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "charex/spherical.hpp"
#include "charex/symfun.hpp"

using namespace charex;

namespace {

// Quantile spectra d_i = -1 + (i-1)/N, e_i = i/N used by the limit tests.
SpectrumSet quantile_D(int N) {
  std::vector<double> d(N);
  for (int i = 1; i <= N; ++i) d[i - 1] = -1.0 + (i - 1.0) / N;
  return SpectrumSet{d};
}
SpectrumSet quantile_E(int N) {
  std::vector<double> e(N);
  for (int i = 1; i <= N; ++i) e[i - 1] = static_cast<double>(i) / N;
  return SpectrumSet{e};
}

// Off-lattice spectra with frozen multiprecision references (these exercise
// the extended-precision elimination; the quantile family above collapses to
// the exact lattice product).
SpectrumSet curved_D(int N) {
  std::vector<double> d(N);
  for (int i = 0; i < N; ++i)
    d[i] = -1.25 + 1.13 * std::pow(static_cast<double>(i) / N, 1.31);
  return SpectrumSet{d};
}
SpectrumSet curved_E(int N) {
  std::vector<double> e(N);
  for (int i = 0; i < N; ++i)
    e[i] = 0.07 + 1.61 * std::pow((i + 1.0) / N, 0.77);
  return SpectrumSet{e};
}

}  // namespace

TEST_CASE("spectrum set basics") {
  SpectrumSet s{{0.5, -1.0, 2.0}};
  CHECK(s.values() == std::vector<double>{-1.0, 0.5, 2.0});
  CHECK(s.min() == -1.0);
  CHECK(s.max() == 2.0);
  CHECK(s.sum() == doctest::Approx(1.5));
  CHECK(s.sup_abs() == 2.0);
  CHECK(s.range() == 3.0);
  CHECK(s.min_spacing() == doctest::Approx(1.5));
  CHECK_FALSE(s.nonnegative());
  CHECK_FALSE(s.nonpositive());
  CHECK(SpectrumSet::constant(3, 0.0).nonnegative());
  CHECK_THROWS_AS((SpectrumSet{std::vector<double>{}}), EmptyInput);
  CHECK_THROWS_AS((SpectrumSet{{0.0, std::nan("")}}), InvalidMeasure);
  CHECK_THROWS_AS((SpectrumSet{{-1.0, 0.5}}.map_log()), NonPositiveInput);
  CHECK(s.capped(0.6).values() == std::vector<double>{-1.0, 0.5, 0.6});
}

TEST_CASE("tie perturbation yields distinct values near the originals") {
  bool moved = false;
  SpectrumSet t{{1.0, 1.0, 1.0, 2.0}};
  SpectrumSet p = t.perturb_ties(1e-8, moved);
  CHECK(moved);
  CHECK(p.min_spacing() >= 0.999e-8);
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(p.values()[i] - t.values()[i]) <= 4e-8);
  // mean of the tied group is preserved by the symmetric spread
  CHECK(p.sum() == doctest::Approx(t.sum()).epsilon(1e-12));
  bool moved2 = true;
  SpectrumSet q{{0.0, 1.0}};
  q.perturb_ties(1e-8, moved2);
  CHECK_FALSE(moved2);
}

TEST_CASE("harish-chandra constant") {
  CHECK(log_czn(1) == doctest::Approx(0.0));
  CHECK(log_czn(2) == doctest::Approx(std::log(1.0 / 2.0)).epsilon(1e-14));
  CHECK(log_czn(3) == doctest::Approx(std::log(2.0 / 27.0)).epsilon(1e-14));
  CHECK(log_czn(4) == doctest::Approx(std::log(12.0 / 4096.0)).epsilon(1e-14));
}

TEST_CASE("hciz exact: rank one and N = 2 closed forms") {
  CHECK(hciz_exact(SpectrumSet{{0.7}}, SpectrumSet{{-1.3}}).log_value ==
        doctest::Approx(-0.91).epsilon(1e-14));
  // N = 2 closed form: I_2 = e^{4 dbar ebar} sinh(x)/x with
  // x = (d2 - d1)(e2 - e1).
  auto closed2 = [](double d1, double d2, double e1, double e2) {
    double db = 0.5 * (d1 + d2), eb = 0.5 * (e1 + e2);
    double x = (d2 - d1) * (e2 - e1);
    return 4.0 * db * eb + std::log(std::expm1(2.0 * x) / (2.0 * x)) - x;
  };
  for (auto [d1, d2, e1, e2] : std::vector<std::array<double, 4>>{
           {-1.0, 0.5, 0.2, 0.9}, {0.1, 0.2, -3.0, 4.0}, {-2.0, -1.0, -1.0, 2.5}}) {
    double got = hciz_exact(SpectrumSet{{d1, d2}}, SpectrumSet{{e1, e2}}).log_value;
    CHECK(got == doctest::Approx(closed2(d1, d2, e1, e2)).epsilon(1e-12));
  }
  // near-zero D: I_N(D, E) -> 1 pins the constant
  bool moved = false;
  SpectrumSet zero = SpectrumSet::constant(4, 0.0).perturb_ties(1e-4, moved);
  CHECK(moved);
  CHECK(std::abs(hciz_exact(zero, SpectrumSet{{-0.7, 0.1, 0.4, 2.2}}).log_value) < 1e-4);
}

TEST_CASE("hciz exact: frozen N = 3 value") {
  // 400-digit multiprecision evaluation of the determinant formula, frozen.
  SpectrumSet D{{-1.1, -0.6, -0.2}};
  SpectrumSet E{{0.3, 0.8, 1.7}};
  CHECK(hciz_exact(D, E).log_value ==
        doctest::Approx(-5.097185980602583969).epsilon(1e-12));
}

TEST_CASE("hciz exact: frozen quantile instances through N = 32") {
  // Multiprecision references for the uniform[-1,0] x uniform[0,1] quantile
  // spectra.  e_i = i/N sits on the integer lattice, so these take the exact
  // product path at every N.
  CHECK(hciz_exact(quantile_D(8), quantile_E(8)).log_value ==
        doctest::Approx(-20.031956291017526214).epsilon(1e-12));
  CHECK(hciz_exact(quantile_D(16), quantile_E(16)).log_value ==
        doctest::Approx(-71.367492971873556572).epsilon(1e-12));
  CHECK(hciz_exact(quantile_D(32), quantile_E(32)).log_value ==
        doctest::Approx(-268.70964042925946033).epsilon(1e-12));
}

TEST_CASE("hciz exact: frozen off-lattice instances") {
  // 220-digit multiprecision references; N = 16 and 24 run the quad LU.
  CHECK(hciz_exact(curved_D(8), curved_E(8)).log_value ==
        doctest::Approx(-56.62001235447559458).epsilon(1e-9));
  CHECK(hciz_exact(curved_D(16), curved_E(16)).log_value ==
        doctest::Approx(-207.07050603572548596).epsilon(1e-11));
  CHECK(hciz_exact(curved_D(24), curved_E(24)).log_value ==
        doctest::Approx(-451.55148856243305755).epsilon(1e-8));
}

TEST_CASE("hciz exact: invariances") {
  SpectrumSet D{{-1.4, -0.3, 0.2, 1.1}};
  SpectrumSet E{{-0.7, 0.1, 0.4, 2.2}};
  double base = hciz_exact(D, E).log_value;
  // symmetry D <-> E
  CHECK(hciz_exact(E, D).log_value == doctest::Approx(base).epsilon(1e-12));
  // shift covariance: E -> E + t multiplies I_N by exp{N t sum D}
  double t = 0.37;
  std::vector<double> es = E.values();
  for (double& x : es) x += t;
  CHECK(hciz_exact(D, SpectrumSet{es}).log_value ==
        doctest::Approx(base + 4.0 * t * D.sum()).epsilon(1e-12));
  CHECK_THROWS_AS(hciz_exact(SpectrumSet::constant(3, 1.0), E), UsageError);
  CHECK_THROWS_AS(hciz_exact(SpectrumSet{{1.0, 1.0, 2.0}}, SpectrumSet{{0.0, 1.0, 2.0}}),
                  DegenerateSpectrum);
}

TEST_CASE("hciz monte carlo agrees with the determinant") {
  RngStream rng(20240817, 5);
  int idx = 0;
  for (int N : {2, 3, 4}) {
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<double> d(N), e(N);
      RngStream sub = rng.substream(static_cast<std::uint64_t>(idx++));
      for (int i = 0; i < N; ++i) d[i] = sub.uniform01() - 0.8;
      for (int i = 0; i < N; ++i) e[i] = 1.2 * sub.uniform01();
      SpectrumSet D{d}, E{e};
      double exact = std::exp(hciz_exact(D, E).log_value);
      SphericalValue mc =
          hciz_mc(D, E, 20000, rng.substream(1000 + static_cast<std::uint64_t>(idx)));
      CHECK(std::abs(std::exp(mc.log_value) - exact) <= 4.0 * mc.std_err + 1e-12);
    }
  }
  // determinism: same stream, same answer
  SpectrumSet D{{-0.5, 0.25}}, E{{0.1, 0.9}};
  double a = hciz_mc(D, E, 512, RngStream(7, 1)).log_value;
  double b = hciz_mc(D, E, 512, RngStream(7, 1)).log_value;
  CHECK(a == b);
}

TEST_CASE("schur bridge matches branching evaluation") {
  // s_{(3,1)}(0.15, 0.35, 0.6, 0.9) = 2.89854375 exactly (frozen from the
  // branching recursion; verified against the Jacobi-Trudi determinant).
  YoungShape shape({3, 1});
  SpectrumSet M{{0.15, 0.35, 0.6, 0.9}};
  double bridge = schur_via_hciz(shape, M);
  CHECK(bridge == doctest::Approx(2.89854375).epsilon(1e-9));
  double direct = schur_branching(shape, M.values());
  CHECK(std::abs(bridge - direct) <= 1e-9 * std::max(1.0, std::abs(direct)));

  for (auto rows : std::vector<std::vector<std::int64_t>>{
           {1}, {2, 2}, {4, 2, 1}, {5}, {2, 2, 2, 1}}) {
    YoungShape sh(rows);
    double b = schur_via_hciz(sh, M);
    double d2 = schur_branching(sh, M.values());
    CHECK(std::abs(b - d2) <= 1e-9 * std::max(1.0, std::abs(d2)));
  }
  CHECK_THROWS_AS(schur_via_hciz(shape, SpectrumSet{{-0.1, 0.5, 0.7, 0.9}}),
                  NonPositiveInput);
  CHECK_THROWS_AS(schur_via_hciz(YoungShape({1, 1, 1}), SpectrumSet{{0.5, 0.9}}),
                  ShapeTooTall);
}

TEST_CASE("cutoff sandwich brackets and tightens") {
  SpectrumSet D{{-1.2, -0.8, -0.3, -0.05}};
  SpectrumSet E{{0.1, 0.7, 1.4, 3.0}};
  double full = hciz_exact(D, E).log_value;
  // raising the cutoff lowers the capped integral toward the true value and
  // shrinks the bracket width N ||D|| tr(E - phi_M(E))
  double prev_upper = 1e300, prev_width = 1e300;
  for (double M : {0.5, 1.0, 2.0, 2.9}) {
    SandwichResult r = cutoff_sandwich(D, E, M);
    CHECK(r.lower <= r.mid + 1e-9);
    CHECK(r.mid <= r.upper + 1e-9);
    CHECK(r.mid == doctest::Approx(full).epsilon(1e-10));
    CHECK(r.upper >= full - 1e-6);
    CHECK(r.upper <= prev_upper + 1e-9);
    CHECK(r.upper - r.lower <= prev_width + 1e-9);
    prev_upper = r.upper;
    prev_width = r.upper - r.lower;
  }
  // M beyond max(E): the sandwich collapses onto the exact value
  SandwichResult r = cutoff_sandwich(D, E, 4.0);
  CHECK(r.lower == doctest::Approx(full).epsilon(1e-10));
  CHECK(r.upper == doctest::Approx(full).epsilon(1e-10));
  CHECK_FALSE(r.perturbed);
  // a cutoff that lands two entries exactly on M still yields a valid bracket
  SandwichResult rt = cutoff_sandwich(D, SpectrumSet{{0.1, 0.7, 2.0, 3.0}}, 1.0);
  CHECK(rt.perturbed);
  CHECK(rt.lower <= rt.mid + 1e-9);
  CHECK(rt.mid <= rt.upper + 1e-9);
  CHECK_THROWS_AS(cutoff_sandwich(E, E, 1.0), HypothesisViolation);
  CHECK_THROWS_AS(cutoff_sandwich(D, D, 1.0), HypothesisViolation);
}

TEST_CASE("jensen bracket holds on random sign-split spectra") {
  RngStream rng(555, 0);
  for (int rep = 0; rep < 100; ++rep) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(rep));
    int N = 2 + static_cast<int>(sub.next_u64() % 5);  // 2..6
    std::vector<double> d(N), e(N);
    for (int i = 0; i < N; ++i) d[i] = -2.0 * sub.uniform01();
    for (int i = 0; i < N; ++i) e[i] = 1.5 * sub.uniform01();
    JensenResult r = jensen_bounds(SpectrumSet{d}, SpectrumSet{e});
    CHECK(r.lower <= r.value + 1e-9 * (1.0 + std::abs(r.lower)));
    CHECK(r.value <= 1e-9);
    CHECK(r.upper == 0.0);
  }
  CHECK_THROWS_AS(jensen_bounds(SpectrumSet{{0.5, 1.0}}, SpectrumSet{{0.1, 0.2}}),
                  HypothesisViolation);
}

TEST_CASE("spherical limit estimate on uniform[-1,0] x uniform[0,1]") {
  GridMeasure muD = GridMeasure::uniform(-1.0, 0.0, 200);
  GridMeasure muE = GridMeasure::uniform(0.0, 1.0, 200);
  LimitEstimate est = spherical_limit_estimate(muD, muE, {8, 16, 32});
  REQUIRE(est.per_n.size() == 3);
  // per-N values are the frozen quantile instances divided by N^2
  CHECK(est.per_n[0] == doctest::Approx(-0.31299931704714885).epsilon(1e-9));
  CHECK(est.per_n[1] == doctest::Approx(-0.27877926942138108).epsilon(1e-9));
  CHECK(est.per_n[2] == doctest::Approx(-0.26241175823169869).epsilon(1e-9));
  // each per-N value sits in its spectrum-level Jensen bracket
  // [mean(D_N) mean(E_N), 0] = [-((N+1)/2N)^2, 0]; the measure-level
  // bracket [-1/4, 0] only constrains the limit estimate
  CHECK(est.jensen_lo == doctest::Approx(-0.25).epsilon(1e-9));
  CHECK(est.jensen_hi == 0.0);
  for (std::size_t k = 0; k < est.per_n.size(); ++k) {
    double N = est.n_values[k];
    double lower_N = -std::pow((N + 1.0) / (2.0 * N), 2.0);
    CHECK(est.per_n[k] >= lower_N - 1e-9);
    CHECK(est.per_n[k] <= 1e-9);
  }
  CHECK(est.per_n[1] > est.per_n[0]);
  CHECK(est.per_n[2] > est.per_n[1]);
  // Richardson extrapolant from N = 16, 32, frozen
  CHECK(est.estimate == doctest::Approx(-0.24604424).epsilon(1e-6));
  CHECK(est.estimate >= est.jensen_lo);
  CHECK(est.estimate <= est.jensen_hi);
  CHECK_FALSE(est.perturbed);
  CHECK_THROWS_AS(spherical_limit_estimate(muE, muE, {8, 16}), HypothesisViolation);
  CHECK_THROWS_AS(spherical_limit_estimate(muD, muE, {8}), UsageError);
  CHECK_THROWS_AS(spherical_limit_estimate(muD, muE, {16, 8}), UsageError);
}

TEST_CASE("spherical limit estimate on atomic measures") {
  // 4-atom measures: quantiles tie in pairs at N = 8; the estimator must
  // auto-split one-sidedly (D down, E up) and flag it.
  DiscreteMeasure muD({-1.2, -0.8, -0.45, -0.1}, {0.25, 0.25, 0.25, 0.25});
  DiscreteMeasure muE({0.2, 0.5, 0.9, 1.3}, {0.25, 0.25, 0.25, 0.25});
  LimitEstimate est = spherical_limit_estimate(muD, muE, {4, 8});
  CHECK(est.perturbed);
  CHECK(est.jensen_lo == doctest::Approx(-0.6375 * 0.725).epsilon(1e-12));
  for (double v : est.per_n) {
    // support-level bound: v_N >= min(D) max(E), and v_N <= 0 because the
    // one-sided splits preserve the sign hypotheses
    CHECK(v >= -1.2 * 1.3 - 1e-6);
    CHECK(v <= 1e-9);
  }
  CHECK(est.estimate >= est.jensen_lo);
  CHECK(est.estimate <= 0.0);

  // two atoms at N = 8 means 4-fold quantile ties: too degenerate for the
  // determinant evaluator, and the library says so
  DiscreteMeasure muD2({-1.0, 0.0}, {0.5, 0.5});
  DiscreteMeasure muE2({0.5, 1.0}, {0.5, 0.5});
  CHECK_THROWS_AS(spherical_limit_estimate(muD2, muE2, {4, 8}), DegenerateSpectrum);
  LimitEstimate small = spherical_limit_estimate(muD2, muE2, {2, 4});
  CHECK(small.perturbed);
  CHECK(small.jensen_lo == doctest::Approx(-0.375).epsilon(1e-12));
  CHECK(small.estimate >= small.jensen_lo);
  CHECK(small.estimate <= 0.0);

  // delta_0 on the D side forces the limit to 0 via the Jensen clamp
  DiscreteMeasure d0 = DiscreteMeasure::dirac(0.0);
  LimitEstimate z = spherical_limit_estimate(d0, muE2, {2, 4});
  CHECK(z.estimate == 0.0);
  CHECK(z.jensen_lo == 0.0);
}
