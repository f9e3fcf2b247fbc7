#pragma once
#include <cstdint>
#include <vector>

#include "charex/measures.hpp"
#include "charex/sampling.hpp"
#include "charex/tableaux.hpp"

namespace charex {

// Sorted eigenvalue list with verified sign/size facts.
class SpectrumSet {
public:
  explicit SpectrumSet(std::vector<double> values);  // sorts ascending
  static SpectrumSet constant(int N, double v);

  const std::vector<double>& values() const { return v_; }
  int size() const { return static_cast<int>(v_.size()); }
  double min() const { return v_.front(); }
  double max() const { return v_.back(); }
  double sum() const;
  double mean() const { return sum() / size(); }
  double sup_abs() const;   // operator norm of the diagonal matrix
  double range() const { return v_.back() - v_.front(); }
  double min_spacing() const;  // +inf for N = 1
  bool nonnegative(double tol = 0.0) const { return v_.front() >= -tol; }
  bool nonpositive(double tol = 0.0) const { return v_.back() <= tol; }

  SpectrumSet map_log() const;               // elementwise log; needs min > 0
  SpectrumSet capped(double M) const;        // phi_M: min(x, M) elementwise
  // Deterministic symmetric tie-splitting: groups closer than eps are spread
  // to spacing eps around their mean.  `perturbed` reports whether anything
  // moved.
  SpectrumSet perturb_ties(double eps, bool& perturbed) const;

private:
  std::vector<double> v_;
};

enum class SphericalMethod { exact_determinant, monte_carlo };

struct SphericalValue {
  double log_value = 0.0;
  double std_err = 0.0;  // stderr of the linear-domain MC mean; 0 for exact
  SphericalMethod method = SphericalMethod::exact_determinant;
};

// log of the Harish-Chandra constant c~_N = prod_{p<N} p! / N^{N(N-1)/2},
// pinned by I_N(0, E) = 1.
double log_czn(int N);

// log I_N(D, E), I_N(D,E) = int exp{N tr(U D U* E)} dm_N(U)
//              = c~_N det(e^{N d_i e_j}) / (Delta(d) Delta(e)).
// Requires pairwise-distinct entries within each argument (spacing >=
// eps_spacing_rel * range); DegenerateSpectrum otherwise.  When one spectrum
// lies on an integer lattice k/N with arithmetic-progression k (e.g. uniform
// quantiles), the determinant collapses to an all-positive product that is
// exact at any N.  Otherwise: log-domain elimination with rank-one centering
// and row-max shifts, in extended precision beyond N = 12 (accurate through
// N ~ 24; expect ~1e-4 absolute log error by N = 32 off the lattice).
SphericalValue hciz_exact(const SpectrumSet& D, const SpectrumSet& E,
                          double eps_spacing_rel = 1e-8);

// Monte-Carlo average of exp{N tr(U D U* E)} over Haar draws.  Works for
// coincident eigenvalues.  log_value = log(mean); std_err is linear-domain.
SphericalValue hciz_mc(const SpectrumSet& D, const SpectrumSet& E,
                       std::int64_t samples, RngStream stream);

// Schur bridge: s_lambda(M) = c~_N^{-1} I_N(log M, l/N) Delta(l/N)
//                             Delta(log M)/Delta(M).
// M positive with distinct entries; must agree with schur_branching.
double schur_via_hciz(const YoungShape& shape, const SpectrumSet& M);

struct SandwichResult {
  double lower = 0.0;  // log I_N(D, phi_M(E)) - N ||D|| tr(E - phi_M(E))
  double mid = 0.0;    // log I_N(D, E)
  double upper = 0.0;  // log I_N(D, phi_M(E))
  bool perturbed = false;
};

// Cutoff sandwich for D <= 0, E >= 0 (Lemma-style bounds).  Asserts
// lower <= mid <= upper within perturbation allowance; SandwichViolation
// otherwise (an evaluator bug, not an input condition).
SandwichResult cutoff_sandwich(const SpectrumSet& D, const SpectrumSet& E, double M);

struct JensenResult {
  double lower = 0.0;  // mean(D) * mean(E)
  double value = 0.0;  // N^{-2} log I_N(D, E)
  double upper = 0.0;  // 0
};

// Jensen bracket for D <= 0, E >= 0: mean(D) mean(E) <= N^{-2} log I_N <= 0.
// BoundViolation if the exact evaluator escapes the bracket.
JensenResult jensen_bounds(const SpectrumSet& D, const SpectrumSet& E);

struct LimitEstimate {
  double estimate = 0.0;   // Richardson extrapolant clamped to the bracket
  double jensen_lo = 0.0;  // mean(mu_D) * mean(mu_E)
  double jensen_hi = 0.0;  // 0
  std::vector<int> n_values;
  std::vector<double> per_n;  // N^{-2} log I_N at quantile discretizations
  bool perturbed = false;     // ties were auto-split somewhere
};

// Finite-N estimate of I(mu_D, mu_E) = lim N^{-2} log I_N over quantile
// SpectrumSets.  mu_D supported in R^-, mu_E in R^+; N_list ascending with
// >= 2 entries.  The extrapolant is an estimate, never asserted as truth;
// it is clamped to the Jensen bracket.
LimitEstimate spherical_limit_estimate(const GridMeasure& mu_D, const GridMeasure& mu_E,
                                       const std::vector<int>& N_list);
LimitEstimate spherical_limit_estimate(const DiscreteMeasure& mu_D,
                                       const DiscreteMeasure& mu_E,
                                       const std::vector<int>& N_list);
// Mixed variant (atomic mu_D, density mu_E): the combination used by the
// rate functionals, where mu_D is a log-pushforward of an atomic spectral law
// and mu_E is a density-class candidate measure.
LimitEstimate spherical_limit_estimate(const DiscreteMeasure& mu_D, const GridMeasure& mu_E,
                                       const std::vector<int>& N_list);

}  // namespace charex
