#pragma once
// Internal: log|det| via partial-pivot LU, double and (when available)
// __float128 paths.  The quad path buys ~18 extra digits, which the
// exponential-kernel determinants (HCIZ) and generalized Vandermondes need
// well before N = 32; both are consumed after row/column scaling so only the
// significand, not the exponent range, is at stake.
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#ifdef CHAREX_HAVE_FLOAT128
#include <quadmath.h>
#endif

namespace charex::detail {

// Destroys A.  Returns log|det|; sign in {-1, 0, +1} via out-parameter.
inline double logdet_lu_double(std::vector<std::vector<double>>& A, int& sign) {
  const int n = static_cast<int>(A.size());
  sign = 1;
  double logdet = 0.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
    if (A[piv][k] == 0.0) {
      sign = 0;
      return -std::numeric_limits<double>::infinity();
    }
    if (piv != k) {
      std::swap(A[piv], A[k]);
      sign = -sign;
    }
    double d = A[k][k];
    if (d < 0) sign = -sign;
    logdet += std::log(std::abs(d));
    for (int i = k + 1; i < n; ++i) {
      double f = A[i][k] / d;
      for (int j = k; j < n; ++j) A[i][j] -= f * A[k][j];
    }
  }
  return logdet;
}

#ifdef CHAREX_HAVE_FLOAT128
inline double logdet_lu_quad(std::vector<std::vector<__float128>>& A, int& sign) {
  const int n = static_cast<int>(A.size());
  sign = 1;
  __float128 logdet = 0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (fabsq(A[i][k]) > fabsq(A[piv][k])) piv = i;
    if (A[piv][k] == 0) {
      sign = 0;
      return -std::numeric_limits<double>::infinity();
    }
    if (piv != k) {
      std::swap(A[piv], A[k]);
      sign = -sign;
    }
    __float128 d = A[k][k];
    if (d < 0) sign = -sign;
    logdet += logq(fabsq(d));
    for (int i = k + 1; i < n; ++i) {
      __float128 f = A[i][k] / d;
      for (int j = k; j < n; ++j) A[i][j] -= f * A[k][j];
    }
  }
  return static_cast<double>(logdet);
}
#endif

}  // namespace charex::detail
