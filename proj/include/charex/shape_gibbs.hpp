#pragma once
#include <cstdint>
#include <functional>

#include "charex/ratefun.hpp"
#include "charex/sampling.hpp"
#include "charex/tableaux.hpp"

namespace charex {

// Metropolis sampling of Young shapes under the tilted character weight
//   w(lambda) = Delta(l/N)^{a+b} I_N(log A, l/N)^a I_N(log B, l/N)^b
//               * exp(N^2 F(mu_hat) - N sum_i c(l_i / N)),
// where l_i = lambda_i + N - i and mu_hat is the empirical measure of l_i/N.
// The chain exhibits the concentration of the shape ensemble around the
// variational minimizer of the rate functional.

// log w(lambda).  When a or b > 0 the mu_A / mu_B marginals are realized as
// N-point spectra via paper_quantiles and the I_N factors are evaluated with
// the exact determinantal formula; repeated quantile values (atoms of mass
// > 1/N) propagate DegenerateSpectrum.  Throws ShapeTooTall for shapes with
// more than N rows.
double shape_log_weight(const YoungShape& shape, int N, const EnsembleSpec& ens);

struct ChainState {
  YoungShape shape;
  double log_weight = 0.0;  // maintained incrementally, revalidated periodically
  std::int64_t step = 0;    // number of attempted moves so far
};

struct GibbsOptions {
  std::int64_t max_boxes = 0;         // 0 = unbounded; else restrict |lambda| <= max_boxes
  std::int64_t burn_in = -1;          // -1 = steps / 5
  std::int64_t revalidate_every = 4096;  // full log-weight recomputation cadence
  YoungShape start;                   // initial shape (default: empty)
  // Called after every attempted move with the post-decision state.
  std::function<void(const ChainState&)> observer;
};

struct GibbsResult {
  ChainState state;          // final chain state
  DiscreteMeasure profile;   // time-averaged empirical measure of l_i/N after burn-in
  double acceptance_rate = 0.0;
  double split_chain_distance = 0.0;  // bl distance between half-chain profiles
  double max_drift = 0.0;    // largest |incremental - recomputed| log weight seen
  std::int64_t accepted = 0;
  std::int64_t steps = 0;
  std::int64_t burn_in = 0;
};

// Metropolis chain with corner_moves proposals, uniform over legal moves and
// Hastings-corrected for the proposal-count asymmetry (exact detailed
// balance).  The a = b = 0 path updates log weights incrementally in O(rows)
// per step; a, b > 0 costs one O(N^3) determinant per attempted move.
GibbsResult metropolis_sample(int N, std::int64_t steps, const EnsembleSpec& ens,
                              RngStream stream, const GibbsOptions& opts = {});

}  // namespace charex
