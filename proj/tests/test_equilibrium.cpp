#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "charex/equilibrium.hpp"
#include "charex/measures.hpp"

using namespace charex;

namespace {

EnsembleSpec linear_ens() {
  return EnsembleSpec(0.0, 0.0, DiscreteMeasure::dirac(1.0), DiscreteMeasure::dirac(1.0),
                      Potential::parse("x"));
}

EnsembleSpec quadratic_ens() {
  return EnsembleSpec(1.0, 1.0, DiscreteMeasure::dirac(1.0), DiscreteMeasure::dirac(1.0),
                      Potential::parse("x^2"));
}

// A random member of the unit-density class on [0, span] (density <= 0.9).
GridMeasure random_class_member(std::mt19937_64& rng, int cells, double span) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const double dx = span / cells;
  std::vector<double> rho(cells);
  double m = 0.0;
  while (true) {
    for (int k = 0; k < cells; ++k) {
      rho[k] = u(rng);
      m += rho[k] * dx;
    }
    double peak = 0.0;
    for (double& r : rho) {
      r /= m;
      peak = std::max(peak, r);
    }
    if (peak <= 0.9) return GridMeasure(0.0, dx, rho);
    m = 0.0;  // rescaling pushed a cell over the cap: redraw
  }
}

double l1_distance(const GridMeasure& a, const std::function<double(double)>& rho_b) {
  double s = 0.0;
  for (int k = 0; k < a.cells(); ++k) s += std::abs(a.rho(k) - rho_b(a.mid(k))) * a.dx();
  return s;
}

}  // namespace

TEST_CASE("quantile discretize: uniform oracle and spacing guarantee") {
  const GridMeasure uni = GridMeasure::uniform(0.0, 1.0, 512);
  const QuantileDiscretization q4 = quantile_discretize(uni, 4, 1.0);
  REQUIRE(q4.points.size() == 4);
  for (int i = 0; i < 4; ++i)
    CHECK(q4.points.values()[i] == doctest::Approx(0.25 * (i + 1)).epsilon(1e-12));
  CHECK(q4.min_scaled_gap == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(q4.shape_valid);
  CHECK(q4.l == std::vector<std::int64_t>{4, 3, 2, 1});
  CHECK(q4.shape == YoungShape({1, 1, 1, 1}));

  // bl_distance(discretization, nu) <= 2/N for the uniform law.
  for (int N : {4, 16, 64}) {
    const QuantileDiscretization q = quantile_discretize(uni, N, 1.0);
    CHECK(q.bl_dist <= 2.0 / N);
    CHECK(q.min_scaled_gap >= 1.0 - 1e-9);
  }

  // Random class members never violate the spacing guarantee.
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int t = 0; t < 1000; ++t) {
    const GridMeasure nu = random_class_member(rng, 48, 2.5);
    const QuantileDiscretization q = quantile_discretize(nu, 8 + t % 17, 2.5);
    CHECK(q.min_scaled_gap >= 1.0 - 1e-9);
    CHECK(q.shape_valid);
    ++checked;
  }
  CHECK(checked == 1000);

  CHECK_THROWS_AS(quantile_discretize(uni, 0, 1.0), UsageError);
  CHECK_THROWS_AS(quantile_discretize(uni, 4, 0.0), UsageError);
}

TEST_CASE("quantile discretize: atoms split, shapes rejected, distance shrinks") {
  // A spike cell of mass 1/2 on width 1/64 mimics an atom: far outside the
  // density class, so the rounded l ties and the shape contract fails.
  std::vector<double> rho(64, 0.0);
  rho[8] = 0.5 * 64;                             // mass 1/2 at ~0.133
  for (int k = 32; k < 64; ++k) rho[k] = 1.0;    // remaining mass spread
  const GridMeasure spiky(0.0, 1.0 / 64, rho);
  CHECK_FALSE(spiky.in_density_class());

  CHECK_THROWS_AS(quantile_discretize(spiky, 16, 1.0), NotInL);

  const QuantileDiscretization q16 = quantile_discretize(spiky, 16, 1.0, false);
  CHECK_FALSE(q16.shape_valid);
  CHECK(q16.min_scaled_gap < 1.0);
  const QuantileDiscretization q64 = quantile_discretize(spiky, 64, 1.0, false);
  CHECK(q64.bl_dist < q16.bl_dist + 1e-12);
  CHECK(q64.bl_dist <= 0.05);
}

TEST_CASE("minimize: bang-bang block for an increasing linear potential") {
  const MinimizeResult res = minimize_over_L(linear_ens(), {2.0, 256});
  CHECK(res.converged);
  CHECK(res.kkt.max_residual() <= 1e-6);
  CHECK(res.minimizer.in_density_class());

  // Unit-density block on [0, 1].
  const double dx = res.minimizer.dx();
  CHECK(l1_distance(res.minimizer, [](double x) { return x < 1.0 ? 1.0 : 0.0; }) <= 2.0 * dx);
  CHECK(res.objective == doctest::Approx(0.5).epsilon(1e-9));  // int_0^1 x dx
  CHECK(res.value.value_tilde == doctest::Approx(res.objective).epsilon(1e-12));

  // No interior cells in a bang-bang solution: complementary residuals only.
  CHECK(res.kkt.residual_interior <= 1e-9);
  for (std::size_t i = 0; i + 1 < res.objective_history.size(); ++i)
    CHECK(res.objective_history[i + 1] <= res.objective_history[i] + 1e-12);
}

TEST_CASE("minimize: quadratic ensemble matches its refined oracle") {
  const EnsembleSpec ens = quadratic_ens();
  const MinimizeResult coarse = minimize_over_L(ens, {3.0, 192});
  const MinimizeResult fine = minimize_over_L(ens, {3.0, 768});
  CHECK(coarse.converged);
  CHECK(fine.converged);
  CHECK(coarse.kkt.max_residual() <= 1e-6);
  CHECK(fine.kkt.max_residual() <= 1e-6);

  // I terms vanish (delta_1 spectra), so the envelope objective is H~ itself.
  CHECK(coarse.objective == doctest::Approx(coarse.value.value_tilde).epsilon(1e-9));
  CHECK(std::abs(coarse.value.value_tilde - fine.value.value_tilde) <= 1e-3);
  CHECK(coarse.value.bracket_tilde.lo == coarse.value.bracket_tilde.hi);

  // The minimizer is an interior-supported density: never touches the wall.
  double edge = 0.0;
  const int n = fine.minimizer.cells();
  for (int k = n - 2; k < n; ++k) edge += fine.minimizer.rho(k) * fine.minimizer.dx();
  CHECK(edge <= 1e-6);

  for (std::size_t i = 0; i + 1 < coarse.objective_history.size(); ++i)
    CHECK(coarse.objective_history[i + 1] <= coarse.objective_history[i] + 1e-12);
}

TEST_CASE("minimize: midpoint convexity of the discretized objective") {
  // Verified through the public kkt gradient relation is awkward; instead
  // sample the objective along random feasible segments via rate_H's
  // components, which reproduce the envelope objective when I terms vanish.
  const EnsembleSpec ens = quadratic_ens();
  std::mt19937_64 rng(17);
  const int cells = 96;
  auto objective = [&](const GridMeasure& nu) {
    const RateReport rep = rate_H(nu, ens, {4, 8});
    return rep.value_tilde;
  };
  int tested = 0;
  for (int t = 0; t < 100; ++t) {
    const GridMeasure nu_a = random_class_member(rng, cells, 3.0);
    const GridMeasure nu_b = random_class_member(rng, cells, 3.0);
    std::vector<double> mid_rho(cells);
    for (int k = 0; k < cells; ++k) mid_rho[k] = 0.5 * (nu_a.rho(k) + nu_b.rho(k));
    const GridMeasure mid(0.0, nu_a.dx(), mid_rho);
    CHECK(objective(mid) <= 0.5 * (objective(nu_a) + objective(nu_b)) + 1e-10);
    ++tested;
  }
  CHECK(tested == 100);
}

TEST_CASE("minimize: boundary detection and infeasible grids") {
  // Potential decreasing on [0, 1.2] pushes mass to the right wall.
  const EnsembleSpec pushy(0.0, 0.0, DiscreteMeasure::dirac(1.0), DiscreteMeasure::dirac(1.0),
                           Potential::parse("x^2 - 2.2x"));
  CHECK_THROWS_AS(minimize_over_L(pushy, {1.2, 96}), GridTooSmall);
  const MinimizeResult ok = minimize_over_L(pushy, {4.0, 256});
  CHECK(ok.converged);
  // Minimizer is the unit block centered at the vertex x = 1.1.
  CHECK(l1_distance(ok.minimizer,
                    [](double x) { return (x > 0.6 && x < 1.6) ? 1.0 : 0.0; }) <= 4.0 * ok.minimizer.dx());

  CHECK_THROWS_AS(minimize_over_L(linear_ens(), {0.9, 64}), UsageError);
  CHECK_THROWS_AS(minimize_over_L(linear_ens(), {2.0, 64, 1.5}), UsageError);
}

TEST_CASE("kkt residual: positive away from the minimizer, zero at it") {
  const EnsembleSpec ens = quadratic_ens();
  const KKTReport at_uniform = kkt_residual(GridMeasure::uniform(0.0, 3.0, 192), ens);
  CHECK(at_uniform.max_residual() > 1e-3);

  const MinimizeResult res = minimize_over_L(ens, {3.0, 192});
  const KKTReport at_min = kkt_residual(res.minimizer, ens);
  CHECK(at_min.max_residual() <= 1e-6);
  CHECK(static_cast<int>(at_min.effective_potential.size()) == 192);

  const KKTReport bang = kkt_residual(minimize_over_L(linear_ens(), {2.0, 256}).minimizer,
                                      linear_ens());
  CHECK(bang.residual_interior <= 1e-9);
  CHECK(bang.residual_lower <= 1e-9);
  CHECK(bang.residual_upper <= 1e-9);
}

TEST_CASE("suggested xmax covers the minimizer support") {
  for (const EnsembleSpec& ens : {linear_ens(), quadratic_ens()}) {
    const double xm = suggested_xmax(ens);
    CHECK(xm >= 2.0);
    CHECK(std::isfinite(xm));
    const MinimizeResult res = minimize_over_L(ens, {xm, 256});
    double top = 0.0;
    const int n = res.minimizer.cells();
    for (int k = n / 2; k < n; ++k) top += res.minimizer.rho(k) * res.minimizer.dx();
    CHECK(top <= 0.5);  // support well inside the suggested window
  }
}
