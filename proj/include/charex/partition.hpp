#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "charex/functions.hpp"
#include "charex/sampling.hpp"
#include "charex/spherical.hpp"
#include "charex/symfun.hpp"
#include "charex/tableaux.hpp"

namespace charex {

// The matrix model: for Hermitian M under the GUE weight exp(-(N/2) tr M^2),
//
//   Z_N(Phi) / Z_N(0) = E[ exp( -tr (x) tr log(I (x) I - B (x) Phi(M) A) ) ].
//
// The GUE law is unitarily invariant, so A and B enter through their spectra
// only and both are taken diagonal.
struct ModelSpec {
  SpectrumSet A, B;
  CutoffFunction phi;

  ModelSpec(SpectrumSet a, SpectrumSet b, CutoffFunction f);  // UsageError on size mismatch
  int N() const { return static_cast<int>(A.size()); }
};

struct HypothesisReport {
  double norm_a = 0.0, norm_b = 0.0;    // operator norms ||A||, ||B||
  double phi_inf = 0.0, phi_sup = 0.0;  // certified range of Phi
  double rho_phi = 0.0;                 // -log ||Phi||_infinity
  double spectral_gap = 0.0;            // 1 - ||Phi|| ||A|| ||B|| > 0
};

// Model hypotheses: A, B nonnegative with norm <= 1, and 0 < Phi <= sup Phi < 1
// (certified by the cutoff family).  The reported gap keeps every factor
// 1 - b_i mu_j away from zero, which makes the log above (and the character
// expansion) well defined.  Throws HypothesisViolation naming the clause.
HypothesisReport validate_hypotheses(const ModelSpec& spec);

// -tr (x) tr log(I (x) I - B (x) Phi(M) A) = sum_{i,j} -log(1 - b_i mu_j)
// with mu_j the eigenvalues of A^{1/2} Phi(M) A^{1/2} (symmetrized product).
// Throws SpectralGapLost if some 1 - b_i mu_j <= 0 (impossible for a
// validated spec; signals a bug, not a user error).
double integrand_log(const ModelSpec& spec, const Eigen::MatrixXcd& M);

// Direct Monte Carlo of Z_N(Phi)/Z_N(0) over GUE draws; deterministic for a
// fixed stream (per-sample substreams, pairwise reduction).
MCEstimate partition_mc_ratio(const ModelSpec& spec, std::uint64_t samples, RngStream stream);

// One term of the character expansion
//   Z_N(Phi)/Z_N(0) = sum_lambda s_lambda(A) s_lambda(B) E[s_lambda(Phi(M))] / d_lambda,
// every factor nonnegative.
struct CharacterTerm {
  YoungShape shape;
  double schur_a = 0.0, schur_b = 0.0;  // s_lambda(A), s_lambda(B)
  double dim = 0.0;                     // d_lambda = s_lambda(1, ..., 1)
  double gue_mean = 0.0;                // estimate of E[s_lambda(Phi(M))]
  double gue_std_err = 0.0;
  double value = 0.0;                   // schur_a * schur_b * gue_mean / dim  (>= 0)
};

struct CharacterSum {
  double value = 0.0;      // truncated sum over |lambda| <= K
  double std_err = 0.0;    // from per-draw totals (draws are shared across shapes)
  double tail_bound = 0.0; // certified bound on the discarded |lambda| > K mass
  std::int64_t K = 0;
  std::uint64_t samples = 0;
  std::vector<CharacterTerm> terms;  // aligned with enumerate_shapes(K, N)
};

// Character-expansion evaluation of Z_N(Phi)/Z_N(0), truncated at |lambda| <= K.
// E[s_lambda(Phi(M))] is estimated over one shared set of GUE draws (variance
// coupling across shapes); the tail uses s_lambda(Phi(M)) <= d_lambda ||Phi||^|lambda|
// and the Cauchy generating-function bound at radius ||Phi|| a_i b_j.
// Throws RadiusViolation if ||Phi|| ||A|| ||B|| >= 1.
CharacterSum partition_character_ratio(const ModelSpec& spec, std::int64_t K,
                                       std::uint64_t samples, RngStream stream);

struct FreeEnergyPoint {
  int N = 0;
  MCEstimate ratio;            // Z_N(Phi)/Z_N(0)
  double value = 0.0;          // N^{-2} log ratio
  double value_std_err = 0.0;  // delta-method propagation of the MC error
};

// Per-N free-energy estimates N^{-2} log(Z_N(Phi)/Z_N(0)).  All specs must
// share the A/B spectral law; a first-moment drift beyond the quantile
// resolution O(1/N) trips HypothesisViolation.  No extrapolation is asserted.
std::vector<FreeEnergyPoint> free_energy_sequence(const std::vector<ModelSpec>& specs,
                                                  std::uint64_t samples, RngStream stream);

}  // namespace charex
