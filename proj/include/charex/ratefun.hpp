#pragma once
#include <map>
#include <string>
#include <vector>

#include "charex/functions.hpp"
#include "charex/measures.hpp"
#include "charex/partition.hpp"
#include "charex/spherical.hpp"
#include "charex/tableaux.hpp"

namespace charex {

// ------------------------------------------------------------------ kernels

// s(x, y) = int_0^1 (alpha x + (1 - alpha) y)^{-1} d alpha
//         = (log x - log y) / (x - y),   s(x, x) = 1/x.
// Continuous across the diagonal: switches to the symmetric-ratio series when
// |x - y| < 1e-6 (x + y).  Requires x, y > 0 (NonPositiveInput).
double s_kernel(double x, double y);

// Exact integral of log|x - y| over a pair of same-width grid cells whose
// midpoints sit k >= 1 cells apart (closed-form antiderivatives; the k = 0
// self-cell is dx^2 (log dx - 3/2)).
double cell_pair_log(int k, double dx);

// Sigma(nu) = int int log|x - y| dnu dnu for a grid measure, with every cell
// pair integrated exactly — Sigma is exact for the piecewise-constant
// density itself.  Fixed-order pairwise accumulation.
double log_energy(const GridMeasure& nu);

// S(mu) = int int log s(x, y) dmu dmu, the full double integral including the
// diagonal (log s(x, x) = -log x).  mu must be supported in (0, inf).
double s_functional(const DiscreteMeasure& mu);

// Finite-N off-diagonal variant S_N = (2/N^2) sum_{i<j} log s(x_i, x_j)
// (converges to S of the empirical limit law; exposed for convergence tests).
double s_functional_finite(const std::vector<double>& points);

// --------------------------------------------------------------- ensembles

// Bounded functional F(nu) = f0 + w1 * m + w2 * m^2 with m = int f dnu for a
// certified bounded f.  Covers a constant, a linear integral of a bounded
// function, and a quadratic double integral with the bounded product kernel
// f(x) f(y); the certified sup is |f0| + |w1| B + |w2| B^2 with
// B = max(|inf f|, |sup f|).
struct BoundedFunctional {
  double f0 = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  BoundedFn f = BoundedFn::constant(0.0);

  static BoundedFunctional zero() { return {}; }
  static BoundedFunctional constant(double v);
  static BoundedFunctional linear(double w1, BoundedFn f);
  static BoundedFunctional quadratic(double f0, double w1, double w2, BoundedFn f);

  double eval(const GridMeasure& nu) const;
  double eval(const DiscreteMeasure& nu) const;
  double certified_sup() const;
};

// The data of the rate functionals H / H~: weights a, b >= 0, atomic spectral
// laws mu_A, mu_B supported in (0, 1], a confining potential with certified
// linear growth, and a bounded functional F.
struct EnsembleSpec {
  double a = 0.0, b = 0.0;
  DiscreteMeasure mu_A, mu_B;
  Potential c;
  BoundedFunctional F;

  EnsembleSpec(double a_, double b_, DiscreteMeasure mu_A_, DiscreteMeasure mu_B_, Potential c_,
               BoundedFunctional F_ = BoundedFunctional::zero());
  double kappa() const { return 0.5 * (a + b); }  // the log-kernel weight
};

// g(x, y) = ((a+b)/2) log|x-y|^{-1} + c(x)/2 + c(y)/2 on [0, inf)^2.
// On the diagonal with a + b > 0 the value is +infinity (a tagged IEEE
// infinity, never an overflow artifact).
double g_value(double x, double y, const EnsembleSpec& ens);

// Certified lower bound g(x, y) >= slope * (x + y) + offset on [0, inf)^2,
// derived from the potential's growth certificate c(x) >= rho x + floor:
// slope = rho/4 when a + b > 0 (a quarter of the growth rate is given up to
// absorb the log singularity), rho/2 otherwise.
struct GrowthBound {
  double slope = 0.0;
  double offset = 0.0;
};
GrowthBound g_lower_bound(const EnsembleSpec& ens);

// --------------------------------------------------------- rate functionals

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};

// An I(mu, nu) term: finite-N point estimate plus its rigorous Jensen
// envelope.  Single-atom mu (I(delta_d, nu) = d * int x dnu) is evaluated in
// closed form with a collapsed bracket.
struct ITerm {
  double estimate = 0.0;
  Bracket bracket;   // [mean(mu) mean(nu), 0]
  bool exact = false;
};
ITerm i_term(const DiscreteMeasure& mu_log, const GridMeasure& nu, const std::vector<int>& N_ref);

struct RateReport {
  double value = 0.0;        // H(nu)
  double value_tilde = 0.0;  // H~(nu): no -(a/2) S(mu_A) - (b/2) S(mu_B) terms
  Bracket bracket;           // envelope for H from the Jensen brackets
  Bracket bracket_tilde;     // envelope for H~
  std::map<std::string, double> components;
  double grid_x0 = 0.0, grid_dx = 0.0;
  int grid_cells = 0;
};

// H(nu) = int c dnu - ((a+b)/2) Sigma(nu) - F(nu) - a I(log# mu_A, nu)
//         - b I(log# mu_B, nu) - (a/2) S(mu_A) - (b/2) S(mu_B),
// with H~ the variant without the S terms.  nu must lie in the unit-density
// class (NotInL otherwise: the functional is +infinity there).  The I terms
// are finite-N estimates over N_ref with Jensen envelopes attached, so the
// report carries a rigorous [lo, hi] alongside the point value (the point
// value always lies inside it).
RateReport rate_H(const GridMeasure& nu, const EnsembleSpec& ens, const std::vector<int>& N_ref);

// Cutoff variant H^M: the double integral of min(g, M) replaces
// int c - kappa Sigma (diagonal cells integrated exactly, cross cells at
// midpoints), same F and I terms.  Nondecreasing in M with
// sup_M H^M = H~ on the same grid.
double h_cutoff(const GridMeasure& nu, const EnsembleSpec& ens, double M,
                const std::vector<int>& N_ref);

// --------------------------------------------- model rate functionals (LDP)

struct ModelFunctionals {
  double g_phi = 0.0;  // G_Phi(nu)
  Bracket g_phi_bracket;
  double j_phi = 0.0;  // J_Phi(nu, mu)
  Bracket j_phi_bracket;
  std::map<std::string, double> components;
};

// G_Phi(nu)    = -I(log# mu_A, nu) - I(log# mu_B, nu) - Sigma(nu) + rho_Phi int x dnu
// J_Phi(nu,mu) = -I(log Psi # mu, nu) - S(Psi # mu)/2 - Sigma(mu) + int x^2 dmu / 2,
// where mu_A, mu_B are the empirical spectral laws of the model and
// Psi = Phi / ||Phi||.  Pushforwards map grid-cell midpoints.  nu must lie in
// the unit-density class (NotInL); A, B must be strictly positive for the log
// pushforward (NonPositiveInput).
ModelFunctionals model_functionals(const GridMeasure& nu, const GridMeasure& mu,
                                   const ModelSpec& spec, const std::vector<int>& N_ref);

// --------------------------------------------------- bounded-Lipschitz metric

// The Dudley metric sup{ int f dmu - int f dnu : ||f||_inf + Lip(f) <= 1 }
// metrizes weak convergence; the Lipschitz-only variant (Kantorovich dual,
// sup over Lip(f) <= 1 alone) is exposed for sensitivity studies.
enum class MetricKind { bounded_lipschitz, lipschitz_only };

struct BLResult {
  double distance = 0.0;
  double sup_budget = 0.0;         // s: ||f||_inf <= s
  double lip_budget = 0.0;         // L: Lip(f) <= L, s + L <= 1
  double feasibility_error = 0.0;  // worst constraint violation of the returned f
  std::vector<double> support;     // merged support points
  std::vector<double> f;           // optimal test function on the support
};

// Exact finite LP on the merged support: for a fixed budget split the chain
// program is solved by a concave piecewise-linear DP, and the split is
// optimized by ternary search (the value is concave in the split).
BLResult bl_distance_detail(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            MetricKind kind = MetricKind::bounded_lipschitz);

double bl_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   MetricKind kind = MetricKind::bounded_lipschitz);
double bl_distance(const GridMeasure& mu, const GridMeasure& nu,
                   MetricKind kind = MetricKind::bounded_lipschitz);
double bl_distance(const GridMeasure& mu, const DiscreteMeasure& nu,
                   MetricKind kind = MetricKind::bounded_lipschitz);
double bl_distance(const DiscreteMeasure& mu, const GridMeasure& nu,
                   MetricKind kind = MetricKind::bounded_lipschitz);

}  // namespace charex
