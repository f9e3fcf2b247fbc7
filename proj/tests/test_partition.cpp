#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "charex/partition.hpp"
#include "charex/symfun.hpp"

using namespace charex;

namespace {

CutoffFunction const_phi(double v) { return CutoffFunction(BoundedFn::constant(v)); }

ModelSpec small_spec(double phi0) {
  return ModelSpec(SpectrumSet{{0.2, 0.4}}, SpectrumSet{{0.2, 0.4}}, const_phi(phi0));
}

// prod_{i,j} (1 - phi0 a_i b_j)^{-1}
double cauchy_closed_form(const std::vector<double>& a, const std::vector<double>& b, double phi0) {
  double v = 1.0;
  for (double ai : a)
    for (double bj : b) v /= 1.0 - phi0 * ai * bj;
  return v;
}

// Simpson quadrature of E_{m ~ N(0,1)}[(1 - a b Phi(m))^{-1}] on [-10, 10].
double n1_quadrature(double a, double b, const CutoffFunction& phi) {
  const int n = 40000;  // even
  const double lo = -10.0, hi = 10.0, h = (hi - lo) / n;
  auto f = [&](double m) {
    const double w = std::exp(-0.5 * m * m) / std::sqrt(2.0 * M_PI);
    return w / (1.0 - a * b * phi.eval(m));
  };
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += f(lo + i * h) * ((i % 2) ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("hypothesis validation") {
  auto rep = validate_hypotheses(small_spec(0.5));
  CHECK(rep.rho_phi == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(rep.phi_sup == doctest::Approx(0.5));
  CHECK(rep.spectral_gap == doctest::Approx(1.0 - 0.5 * 0.4 * 0.4).epsilon(1e-14));

  // Certified range enforced at construction of the cutoff itself.
  CHECK_THROWS_AS(const_phi(1.2), HypothesisViolation);
  CHECK_THROWS_AS(const_phi(1.0), HypothesisViolation);
  CHECK_THROWS_AS(const_phi(0.0), HypothesisViolation);
  CHECK_THROWS_AS(const_phi(-0.3), HypothesisViolation);

  // Spectra must be nonnegative with norm <= 1.
  CHECK_THROWS_AS(
      validate_hypotheses(ModelSpec(SpectrumSet{{-0.1, 0.5}}, SpectrumSet{{0.2, 0.4}}, const_phi(0.5))),
      HypothesisViolation);
  CHECK_THROWS_AS(
      validate_hypotheses(ModelSpec(SpectrumSet{{0.2, 1.1}}, SpectrumSet{{0.2, 0.4}}, const_phi(0.5))),
      HypothesisViolation);
  CHECK_THROWS_AS(
      validate_hypotheses(ModelSpec(SpectrumSet{{0.2, 0.4}}, SpectrumSet{{0.2, -1.0}}, const_phi(0.5))),
      HypothesisViolation);

  // Norm exactly 1 is allowed (sup_N ||A_N|| <= 1).
  CHECK_NOTHROW(validate_hypotheses(
      ModelSpec(SpectrumSet{{0.0, 1.0}}, SpectrumSet{{0.2, 0.4}}, const_phi(0.5))));

  CHECK_THROWS_AS(ModelSpec(SpectrumSet{{0.2}}, SpectrumSet{{0.2, 0.4}}, const_phi(0.5)),
                  UsageError);
}

TEST_CASE("integrand closed forms") {
  RngStream rng(7, 0);

  SUBCASE("B = 0 gives zero for any M") {
    ModelSpec spec(SpectrumSet{{0.3, 0.8, 0.9}}, SpectrumSet{{0.0, 0.0, 0.0}}, const_phi(0.5));
    for (int rep = 0; rep < 3; ++rep) {
      const Eigen::MatrixXcd M = gue_sample(3, rng.substream(rep));
      CHECK(integrand_log(spec, M) == 0.0);
    }
  }

  SUBCASE("constant Phi is M-independent and matches the closed form") {
    const std::vector<double> a{0.2, 0.7}, b{0.5, 0.6};
    const double phi0 = 0.45;
    ModelSpec spec(SpectrumSet{a}, SpectrumSet{b}, const_phi(phi0));
    double expect = 0.0;
    for (double ai : a)
      for (double bj : b) expect -= std::log1p(-phi0 * ai * bj);
    const double v1 = integrand_log(spec, gue_sample(2, rng.substream(11)));
    const double v2 = integrand_log(spec, gue_sample(2, rng.substream(12)));
    CHECK(v1 == doctest::Approx(expect).epsilon(1e-13));
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-13));
  }

  SUBCASE("N = 1 scalar formula") {
    CutoffFunction phi = CutoffFunction::parse("ratquad:0.3,0.2");
    ModelSpec spec(SpectrumSet{{0.8}}, SpectrumSet{{0.9}}, phi);
    Eigen::MatrixXcd M(1, 1);
    M(0, 0) = 1.7;
    const double expect = -std::log1p(-0.9 * phi.eval(1.7) * 0.8);
    CHECK(integrand_log(spec, M) == doctest::Approx(expect).epsilon(1e-14));
  }

  SUBCASE("dimension mismatch is a usage error") {
    ModelSpec spec = small_spec(0.5);
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(3, 3);
    CHECK_THROWS_AS(integrand_log(spec, M), UsageError);
  }
}

TEST_CASE("mc ratio exact cases") {
  SUBCASE("B = 0 forces the constant estimator 1") {
    ModelSpec spec(SpectrumSet{{0.3, 0.8}}, SpectrumSet{{0.0, 0.0}}, const_phi(0.5));
    auto est = partition_mc_ratio(spec, 64, RngStream(3, 0));
    CHECK(est.mean == 1.0);
    CHECK(est.std_err == 0.0);
    CHECK(est.n == 64);
  }

  SUBCASE("constant Phi integrand is deterministic") {
    const std::vector<double> a{0.2, 0.4}, b{0.2, 0.4};
    ModelSpec spec = small_spec(0.5);
    auto est = partition_mc_ratio(spec, 50, RngStream(3, 1));
    CHECK(est.mean == doctest::Approx(cauchy_closed_form(a, b, 0.5)).epsilon(1e-12));
    CHECK(est.std_err <= 1e-10);
  }

  SUBCASE("determinism for a fixed stream") {
    ModelSpec spec(SpectrumSet{{0.3, 0.8}}, SpectrumSet{{0.5, 0.6}},
                   CutoffFunction::parse("ratquad:0.3,0.2"));
    auto e1 = partition_mc_ratio(spec, 500, RngStream(11, 4));
    auto e2 = partition_mc_ratio(spec, 500, RngStream(11, 4));
    CHECK(e1.mean == e2.mean);
    CHECK(e1.std_err == e2.std_err);
  }
}

TEST_CASE("mc ratio N = 1 against quadrature") {
  CutoffFunction phi = CutoffFunction::parse("ratquad:0.3,0.2");
  ModelSpec spec(SpectrumSet{{0.8}}, SpectrumSet{{0.9}}, phi);
  auto est = partition_mc_ratio(spec, 200000, RngStream(101, 0));
  const double oracle = n1_quadrature(0.8, 0.9, phi);
  CHECK(std::abs(est.mean - oracle) <= 4.0 * est.std_err + 1e-8);
}

TEST_CASE("character sum telescopes for constant Phi") {
  const std::vector<double> a{0.2, 0.4}, b{0.2, 0.4};
  const double phi0 = 0.5;
  ModelSpec spec = small_spec(phi0);
  const double product = cauchy_closed_form(a, b, phi0);

  double prev_value = 0.0, prev_gap = product;
  for (std::int64_t K : {2, 6, 10, 14}) {
    auto cs = partition_character_ratio(spec, K, 32, RngStream(5, K));
    // Constant Phi: s_lambda(Phi(M)) = phi0^{|lambda|} d_lambda exactly, so the
    // estimator has zero variance and the truncation is the exact Cauchy prefix.
    double exact_prefix = 0.0;
    for (const CharacterTerm& t : cs.terms) {
      CHECK(t.gue_std_err <= 1e-14 * (1.0 + t.gue_mean));
      CHECK(t.gue_mean ==
            doctest::Approx(std::pow(phi0, t.shape.boxes()) * t.dim).epsilon(1e-11));
      exact_prefix += t.schur_a * t.schur_b * std::pow(phi0, t.shape.boxes());
    }
    CHECK(cs.value == doctest::Approx(exact_prefix).epsilon(1e-11));
    const double gap = product - cs.value;
    CHECK(gap >= -1e-12);
    CHECK(gap <= cs.tail_bound + 1e-12);
    CHECK(cs.value >= prev_value - 1e-12);  // monotone in K
    CHECK(gap <= prev_gap + 1e-12);
    prev_value = cs.value;
    prev_gap = gap;
  }
}

TEST_CASE("character sum with B = 0 is exactly 1") {
  ModelSpec spec(SpectrumSet{{0.3, 0.8}}, SpectrumSet{{0.0, 0.0}}, const_phi(0.5));
  auto cs = partition_character_ratio(spec, 6, 16, RngStream(9, 0));
  CHECK(cs.value == 1.0);
  CHECK(cs.std_err == 0.0);
  CHECK(cs.tail_bound == 0.0);
  for (const CharacterTerm& t : cs.terms) CHECK(t.value >= 0.0);
}

TEST_CASE("estimator agreement, positivity, symmetry") {
  CutoffFunction phi = CutoffFunction::parse("ratquad:0.3,0.2");
  ModelSpec spec(SpectrumSet{{0.2, 0.4}}, SpectrumSet{{0.2, 0.4}}, phi);
  const std::uint64_t draws = 100000;

  auto mc = partition_mc_ratio(spec, draws, RngStream(2024, 1));
  auto cs = partition_character_ratio(spec, 20, draws, RngStream(2024, 2));

  // Two independent computations of Z_N(Phi)/Z_N(0).
  CHECK(std::abs(mc.mean - cs.value) <= 4.0 * (mc.std_err + cs.std_err) + cs.tail_bound + 1e-12);

  // Every term of the expansion is nonnegative (the unsigned-series property).
  for (const CharacterTerm& t : cs.terms) {
    CHECK(t.schur_a >= 0.0);
    CHECK(t.schur_b >= 0.0);
    CHECK(t.gue_mean >= 0.0);
    CHECK(t.value >= 0.0);
  }

  // K-monotonicity under shared draws.
  auto cs_small = partition_character_ratio(spec, 10, draws, RngStream(2024, 2));
  CHECK(cs_small.value <= cs.value + 1e-12);
  CHECK(cs_small.tail_bound >= cs.tail_bound - 1e-15);

  // A <-> B symmetry: the character estimator is exactly symmetric.
  ModelSpec flipped(SpectrumSet{{0.1, 0.5}}, SpectrumSet{{0.3, 0.6}}, phi);
  ModelSpec flopped(SpectrumSet{{0.3, 0.6}}, SpectrumSet{{0.1, 0.5}}, phi);
  auto c1 = partition_character_ratio(flipped, 12, 4000, RngStream(77, 0));
  auto c2 = partition_character_ratio(flopped, 12, 4000, RngStream(77, 0));
  CHECK(c1.value == doctest::Approx(c2.value).epsilon(1e-12));
  CHECK(c1.tail_bound == doctest::Approx(c2.tail_bound).epsilon(1e-12));
  // The MC estimator is symmetric in distribution; same-seed runs agree
  // within statistical error.
  auto m1 = partition_mc_ratio(flipped, 20000, RngStream(78, 0));
  auto m2 = partition_mc_ratio(flopped, 20000, RngStream(78, 0));
  CHECK(std::abs(m1.mean - m2.mean) <= 4.0 * (m1.std_err + m2.std_err));
}

TEST_CASE("positivity on a second model family") {
  CutoffFunction phi = CutoffFunction::parse("logistic:0.2,0.5,1.3");
  ModelSpec spec(SpectrumSet{{0.1, 0.55, 0.9}}, SpectrumSet{{0.25, 0.5, 0.75}}, phi);
  auto cs = partition_character_ratio(spec, 8, 2000, RngStream(31, 5));
  CHECK(cs.value >= 1.0);  // the empty shape alone contributes 1
  for (const CharacterTerm& t : cs.terms) CHECK(t.value >= 0.0);
  CHECK(std::isfinite(cs.tail_bound));
}

TEST_CASE("free energy sequence") {
  SUBCASE("constant Phi with scalar spectra is a constant sequence") {
    const double a = 0.5, phi0 = 0.4;
    std::vector<ModelSpec> specs;
    for (int N : {2, 3, 4}) {
      std::vector<double> av(N, a);
      specs.emplace_back(SpectrumSet{av}, SpectrumSet{av}, const_phi(phi0));
    }
    auto seq = free_energy_sequence(specs, 40, RngStream(1, 0));
    REQUIRE(seq.size() == 3);
    const double expect = -std::log1p(-phi0 * a * a);
    for (const auto& p : seq) {
      CHECK(p.value == doctest::Approx(expect).epsilon(1e-11));
      CHECK(p.value_std_err <= 1e-10);
    }
  }

  SUBCASE("B = 0 gives zeros") {
    std::vector<ModelSpec> specs;
    for (int N : {2, 3}) {
      specs.emplace_back(SpectrumSet{std::vector<double>(N, 0.5)},
                         SpectrumSet{std::vector<double>(N, 0.0)}, const_phi(0.4));
    }
    auto seq = free_energy_sequence(specs, 16, RngStream(2, 0));
    for (const auto& p : seq) {
      CHECK(p.value == 0.0);
      CHECK(p.value_std_err == 0.0);
    }
  }

  SUBCASE("first-moment drift is rejected") {
    std::vector<ModelSpec> specs;
    specs.emplace_back(SpectrumSet{{0.5, 0.5}}, SpectrumSet{{0.5, 0.5}}, const_phi(0.4));
    specs.emplace_back(SpectrumSet{{0.9, 0.9, 0.9}}, SpectrumSet{{0.5, 0.5, 0.5}},
                       const_phi(0.4));
    CHECK_THROWS_AS(free_energy_sequence(specs, 8, RngStream(3, 0)), HypothesisViolation);
  }

  SUBCASE("generic trend is finite and recorded") {
    CutoffFunction phi = CutoffFunction::parse("ratquad:0.3,0.2");
    std::vector<ModelSpec> specs;
    for (int N : {2, 3, 4}) {
      // Quantiles of Uniform[0.2, 0.8] at levels i/(N+1).
      std::vector<double> q(N);
      for (int i = 1; i <= N; ++i) q[i - 1] = 0.2 + 0.6 * i / (N + 1.0);
      specs.emplace_back(SpectrumSet{q}, SpectrumSet{q}, phi);
    }
    auto seq = free_energy_sequence(specs, 4000, RngStream(4, 0));
    for (const auto& p : seq) {
      CHECK(std::isfinite(p.value));
      CHECK(p.value > 0.0);  // nonnegative series with the empty term = 1
      CHECK(p.value_std_err > 0.0);
    }
  }
}
