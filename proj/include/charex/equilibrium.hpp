#pragma once
#include <cstdint>
#include <vector>

#include "charex/ratefun.hpp"
#include "charex/tableaux.hpp"

namespace charex {

// ------------------------------------------------- quantile discretization

// N spectrum points a_{N,N} < ... < a_{1,N} from the nested-infimum quantile
// rule applied to the truncation phi_L # nu, plus the rounded shape data
// l_i = floor(N a_{i,N}) (descending).  For nu in the unit-density class the
// spacing satisfies N (a_i - a_{i+1}) >= 1, so the l_i strictly decrease and
// encode a valid Young shape.
struct QuantileDiscretization {
  SpectrumSet points;                   // ascending
  std::vector<std::int64_t> l;          // descending, l_i = floor(N a_{i,N})
  YoungShape shape;                     // lambda_i = l_i - (N - i); empty rows trimmed
  bool shape_valid = false;             // l strictly decreasing and nonnegative
  double min_scaled_gap = 0.0;          // min_i N (a_i - a_{i+1})
  double bl_dist = 0.0;                 // bl_distance(empirical(points), phi_L # nu)
};

// require_shape = true (the default) enforces the 𝓛-membership contract:
// NotInL when the rounded sequence is not strictly decreasing.  Pass false to
// obtain the spectrum points for measures outside the class (e.g. atoms,
// which the quantile rule splits into ~ floor(N mass) nearly equal values).
QuantileDiscretization quantile_discretize(const GridMeasure& nu, int N, double L,
                                           bool require_shape = true);

// ------------------------------------------------- constrained minimization

// Discretization domain for the density-capped class: cells of equal width
// dx = x_max / cells on [0, x_max], densities in [0, cap] with unit mass.
struct GridSpec {
  double x_max = 4.0;
  int cells = 256;
  double cap = 1.0;
};

// First-order optimality data for the capped problem.  The effective
// potential is the mass gradient c(x) - (a+b) int log|x-y| dnu(y) plus the
// envelope gradients of the F and I terms; at a minimizer it is constant on
// interior cells, >= the constant where rho = 0, <= it where rho = cap.
struct KKTReport {
  std::vector<double> effective_potential;  // per cell
  double lagrange_const = 0.0;
  double residual_interior = 0.0;
  double residual_lower = 0.0;
  double residual_upper = 0.0;
  double max_residual() const;
};

struct MinimizeResult {
  GridMeasure minimizer;
  KKTReport kkt;
  RateReport value;       // rate_H at the minimizer, with its Jensen brackets
  double objective = 0.0; // envelope objective at the minimizer
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // nonincreasing by construction
};

// Projected-gradient minimization of the envelope objective
//   f(nu) = int c dnu - kappa Sigma(nu) - F(nu) - (a d_A + b d_B) int x dnu,
// d_A = mean(log# mu_A), over {0 <= rho <= cap, total mass 1}.  The linear I
// envelope is exact for single-atom mu (the acceptance regime) and a minorant
// otherwise, so f majorizes H~ and rate_H at the minimizer brackets the gap.
// Projection is exact shift-and-clip bisection; steps are Barzilai-Borwein
// seeded with Armijo backtracking, so the objective never increases.  Stops
// at KKT residual <= kkt_tol or max_iter.  GridTooSmall if the minimizer
// holds more than 1e-6 mass in the top two cells.
MinimizeResult minimize_over_L(const EnsembleSpec& ens, const GridSpec& grid,
                               int max_iter = 100000, double kkt_tol = 1e-6);

// KKT residuals of an arbitrary feasible density for the same objective.
KKTReport kkt_residual(const GridMeasure& nu, const EnsembleSpec& ens, double cap = 1.0);

// A-priori right endpoint from the growth bound: minimizers live where
// g_lower_bound keeps the level set of the initial block compact,
// x_max >= (level - offset + sup|F|) / slope, padded by margin.
double suggested_xmax(const EnsembleSpec& ens, double margin = 2.0);

}  // namespace charex
