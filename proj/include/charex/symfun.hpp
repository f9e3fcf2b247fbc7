#pragma once
#include <cstdint>
#include <vector>

#include "charex/tableaux.hpp"

namespace charex {

// Numeric mode for the determinant route.  `extended` runs the pivoted
// elimination with a 113-bit significand (__float128) to guard large
// exponents / near-degenerate nodes.
enum class Precision { standard, extended };

// Trusted route: branching (Gelfand-Tsetlin) dynamic program implementing the
// semistandard-tableau definition.  Works for any real x, any shape with
// rows(lambda) <= x.size().  `budget` caps the number of DP transitions
// (ComplexityGuard beyond it).
double schur_branching(const YoungShape& shape, const std::vector<double>& x,
                       std::uint64_t budget = 50'000'000ull);

// Batch variant: values for every shape in enumerate_shapes(max_boxes,
// x.size()), aligned with that ordering.  Shares the DP across shapes.
std::vector<double> schur_branching_all(std::int64_t max_boxes, const std::vector<double>& x,
                                        std::uint64_t budget = 50'000'000ull);

// Fast route: bialternant determinant det(x_i^{l_j}) / det(x_i^{N-j}) with
// column scaling, evaluated in log domain.  Requires distinct nodes
// (DegenerateVandermonde otherwise).
double schur_determinant(const YoungShape& shape, const std::vector<double>& x,
                         Precision mode = Precision::standard);

// dim s_lambda at x = (1,...,1): Delta(l) / prod_{i=1}^{N-1} i!.
// Integer-exact whenever the exact product fits 128 bits (in particular for
// |lambda| <= 12, N <= 6); falls back to a stable ratio product beyond.
double dim_shape(const YoungShape& shape, int N);
double log_dim_shape(const YoungShape& shape, int N);  // log d_lambda, stable for large shapes

struct CauchySum {
  double partial_sum = 0.0;  // sum over |lambda| <= K of s_lambda(x) s_lambda(y)
  double tail_bound = 0.0;   // certified bound on the discarded |lambda| > K mass
  std::int64_t boxes_used = 0;
  double q_used = 0.0;       // the generating-function grid point realizing the bound
};

// Truncated Cauchy sum plus generating-function tail bound
//   tail <= min_q q^{-(K+1)} prod_{i,j} (1 - q x_i y_j)^{-1},  1 < q < 1/max(x_i y_j),
// minimized over a geometric grid of q.  Requires x, y >= 0 and
// max x_i y_j < 1 (RadiusViolation otherwise).
CauchySum cauchy_truncated(const std::vector<double>& x, const std::vector<double>& y,
                           std::int64_t K);

// Closed form prod_{i,j} 1/(1 - x_i y_j); same preconditions.
double cauchy_product(const std::vector<double>& x, const std::vector<double>& y);

// The tail bound alone, for radius m = max over the pair products involved
// (used by the character expansion with m = |Phi| * a_i * b_j).
double cauchy_tail_bound(const std::vector<double>& x, const std::vector<double>& y,
                         std::int64_t K, double extra_radius_factor = 1.0);

}  // namespace charex
