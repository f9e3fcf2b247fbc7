#include "charex/yangmills.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "charex/errors.hpp"
#include "charex/measures.hpp"
#include "charex/parallel.hpp"
#include "charex/symfun.hpp"

namespace charex {
namespace {

void validate_temperature(double T) {
  if (!std::isfinite(T) || T < 0.0)
    throw UsageError("temperature T must be finite and >= 0");
}

void check_unit_box(const SpectrumSet& S, const char* name) {
  if (!(S.min() > 0.0) || !(S.max() <= 1.0 + 1e-12))
    throw HypothesisViolation(std::string(name) + " entries must lie in (0, 1]");
}

// log w(l) with w(l) = r^l e^{-(t/2) l (l - N + 1)}; r = 1 gives the plain
// heat-kernel weight.
double log_weight(std::int64_t l, double t, int N, double log_r) {
  const double ld = static_cast<double>(l);
  return ld * log_r - 0.5 * t * ld * (ld - static_cast<double>(N) + 1.0);
}

double log_superfactorial(int N) {  // log prod_{m=1}^{N-1} m!
  double s = 0.0;
  for (int m = 2; m < N; ++m) s += std::lgamma(static_cast<double>(m) + 1.0);
  return s;
}

double casimir_const3(int N) {  // c3 = N (N-1) (N-2) / 6
  return static_cast<double>(N) * (N - 1.0) * (N - 2.0) / 6.0;
}

double log_vandermonde_asc(const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t j = 1; j < v.size(); ++j)
    for (std::size_t i = 0; i < j; ++i) s += std::log(v[j] - v[i]);
  return s;
}

// log K(x, y) = log sum_{l >= 0} (x y)^l w(l), summed around the peak
// l* = (N - 1)/2 + log(xy)/t with the running terms scaled by the peak.
double log_kernel(double x, double y, double t, int N) {
  const double lxy = std::log(x * y);  // <= 0 on (0, 1]^2
  const auto expo = [&](std::int64_t l) { return static_cast<double>(l) * lxy + log_weight(l, t, N, 0.0); };
  std::int64_t l0 = 0;
  if (t > 0.0) {
    const double lstar = 0.5 * (N - 1.0) + lxy / t;
    l0 = std::max<std::int64_t>(0, std::llround(lstar));
  }
  double peak = expo(0);
  for (std::int64_t l : {l0 - 1, l0, l0 + 1})
    if (l >= 0) peak = std::max(peak, expo(l));
  double sum = 0.0;
  for (std::int64_t l = 0;; ++l) {
    const double e = expo(l);
    sum += std::exp(e - peak);
    if (l > l0 && l >= N && e < peak - 60.0) break;
    if (l > 100000000)
      throw ConvergenceFailure("character series did not decay; check T > 0");
  }
  return peak + std::log(sum);
}

struct HillClimb {
  YoungShape shape;
  double value = 0.0;
};

bool valid_parts(const std::vector<std::int64_t>& p) {
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] < 0) return false;
    if (j + 1 < p.size() && p[j] < p[j + 1]) return false;
  }
  return true;
}

// Local moves for the modal search: single-row edits by +-1..3 (corner moves
// are the legal +-1 subset), short new rows, and full-column add/remove
// (+-1 on a whole row prefix) so coordinated staircase growth is reachable.
std::vector<YoungShape> local_moves(const YoungShape& cur, int N) {
  std::vector<YoungShape> out;
  const std::vector<std::int64_t>& parts = cur.parts();
  const std::size_t rows = parts.size();
  for (std::size_t i = 0; i <= rows; ++i) {
    for (int d : {1, 2, 3, -1, -2, -3}) {
      std::vector<std::int64_t> p = parts;
      if (i == rows) {
        if (d <= 0 || static_cast<int>(rows) >= N) continue;
        p.push_back(d);
      } else {
        p[i] += d;
      }
      if (valid_parts(p)) out.emplace_back(std::move(p));
    }
  }
  for (std::size_t h = 1; h <= std::min<std::size_t>(rows + 1, static_cast<std::size_t>(N)); ++h) {
    std::vector<std::int64_t> p = parts;
    if (h == rows + 1) p.push_back(0);
    for (std::size_t i = 0; i < h; ++i) ++p[i];
    if (valid_parts(p)) out.emplace_back(std::move(p));
  }
  for (std::size_t h = 1; h <= rows; ++h) {
    std::vector<std::int64_t> p = parts;
    for (std::size_t i = 0; i < h; ++i) --p[i];
    if (valid_parts(p)) out.emplace_back(std::move(p));
  }
  return out;
}

// Steepest ascent of G(lambda) = 2 log d_lambda - (t/2) C2(lambda) over the
// local moves, from the empty shape, until no move improves.
HillClimb climb_modal(double t, int N) {
  const auto G = [&](const YoungShape& s) {
    return 2.0 * log_dim_shape(s, N) - 0.5 * t * static_cast<double>(casimir_c2(s, N));
  };
  YoungShape cur;  // empty shape
  double cur_g = G(cur);
  for (int guard = 0;; ++guard) {
    YoungShape best = cur;
    double best_g = cur_g;
    for (YoungShape& cand : local_moves(cur, N)) {
      const double g = G(cand);
      if (g > best_g + 1e-12) {
        best = std::move(cand);
        best_g = g;
      }
    }
    if (!(best_g > cur_g + 1e-12)) break;
    cur = std::move(best);
    cur_g = best_g;
    if (guard > 2000000) throw ConvergenceFailure("modal hill climb did not stabilize");
  }
  return {cur, cur_g};
}

double log_sum_exp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double e : v) s += std::exp(e - mx);
  return mx + std::log(s);
}

}  // namespace

YmValue ym_partition(const SpectrumSet& A, const SpectrumSet& B, double T, int N,
                     std::int64_t K) {
  validate_temperature(T);
  if (N < 1) throw UsageError("N must be >= 1");
  if (A.size() != N || B.size() != N)
    throw UsageError("A and B must each carry N eigenvalues");
  if (K < 0) throw UsageError("box cutoff K must be >= 0");
  check_unit_box(A, "A");
  check_unit_box(B, "B");
  // RadiusViolation propagates from the tail bound when max(A) max(B) >= 1.
  const double tail = cauchy_tail_bound(A.values(), B.values(), K);
  const auto shapes = enumerate_shapes(K, N);
  const auto sa = schur_branching_all(K, A.values());
  const auto sb = schur_branching_all(K, B.values());
  const double half_t = 0.5 * T / N;
  std::vector<double> terms(shapes.size());
  par::parallel_fill(terms.size(), terms.data(), [&](std::size_t i) {
    return sa[i] * sb[i] *
           std::exp(-half_t * static_cast<double>(casimir_c2(shapes[i], N)));
  });
  return YmValue{par::pairwise_sum(terms), tail, K};
}

std::int64_t ym_choose_k(const SpectrumSet& A, const SpectrumSet& B, double tol,
                         std::int64_t k_cap) {
  if (!(tol > 0.0)) throw UsageError("tolerance must be > 0");
  if (k_cap < 0) throw UsageError("k_cap must be >= 0");
  if (A.size() != B.size()) throw UsageError("A and B must have equal size");
  check_unit_box(A, "A");
  check_unit_box(B, "B");
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t K = 0; K <= k_cap; ++K) {
    const double tail = cauchy_tail_bound(A.values(), B.values(), K);
    best = std::min(best, tail);
    if (tail <= tol) return K;
  }
  throw TailNotCertified("no K <= " + std::to_string(k_cap) +
                         " certifies tail <= " + std::to_string(tol) +
                         " (best bound " + std::to_string(best) + ")");
}

double ym_log_partition_exact(const SpectrumSet& A, const SpectrumSet& B, double T,
                              int N) {
  validate_temperature(T);
  if (N < 1) throw UsageError("N must be >= 1");
  if (A.size() != N || B.size() != N)
    throw UsageError("A and B must each carry N eigenvalues");
  check_unit_box(A, "A");
  check_unit_box(B, "B");
  if (T == 0.0)  // Cauchy closed form; RadiusViolation inside when max max >= 1
    return std::log(cauchy_product(A.values(), B.values()));
  if (N >= 2) {
    for (const SpectrumSet* s : {&A, &B}) {
      const double scale = std::max({s->range(), s->sup_abs(), 1e-300});
      if (s->min_spacing() < 1e-8 * scale)
        throw DegenerateSpectrum(
            "coincident eigenvalues; use ym_log_partition_ones or perturb_ties");
    }
  }
  const double t = T / N;
  Eigen::MatrixXd M(N, N);
  std::vector<double> row_scale(N, 0.0);
  std::vector<double> lk(static_cast<std::size_t>(N) * N);
  par::parallel_fill(lk.size(), lk.data(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / N, j = static_cast<int>(idx) % N;
    return log_kernel(A.values()[i], B.values()[j], t, N);
  });
  for (int i = 0; i < N; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < N; ++j) mx = std::max(mx, lk[static_cast<std::size_t>(i) * N + j]);
    row_scale[i] = mx;
    for (int j = 0; j < N; ++j)
      M(i, j) = std::exp(lk[static_cast<std::size_t>(i) * N + j] - mx);
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  double log_det = 0.0;
  double sign = static_cast<double>(lu.permutationP().determinant());
  for (int i = 0; i < N; ++i) {
    const double u = lu.matrixLU()(i, i);
    if (u == 0.0 || !std::isfinite(u))
      throw ConvergenceFailure("kernel determinant is numerically singular");
    sign *= (u > 0.0) ? 1.0 : -1.0;
    log_det += std::log(std::abs(u));
  }
  if (sign <= 0.0)
    throw ConvergenceFailure("kernel determinant lost positivity; spectra too close");
  for (int i = 0; i < N; ++i) log_det += row_scale[i];
  return -0.5 * t * casimir_const3(N) + log_det - log_vandermonde_asc(A.values()) -
         log_vandermonde_asc(B.values());
}

double ym_log_partition_ones(double T, int N, double r) {
  validate_temperature(T);
  if (N < 1) throw UsageError("N must be >= 1");
  if (!(r > 0.0) || r > 1.0 + 1e-12)
    throw HypothesisViolation("radius r must lie in (0, 1]");
  if (T == 0.0) {
    if (r >= 1.0)
      throw RadiusViolation("T = 0 needs max(A) max(B) < 1 for convergence");
    return -static_cast<double>(N) * N * std::log1p(-r);
  }
  const double t = T / N;
  const double log_r = std::log(r);
  // Support cutoff: stop once the heaviest moment integrand
  // max(l,1)^{2(N-1)} w(l) has fallen 160 e-folds below its running peak.
  std::vector<double> lw;
  double peak = -std::numeric_limits<double>::infinity();
  for (std::int64_t l = 0;; ++l) {
    const double w = log_weight(l, t, N, log_r);
    const double tau = w + 2.0 * (N - 1.0) * std::log(std::max<double>(static_cast<double>(l), 1.0));
    peak = std::max(peak, tau);
    lw.push_back(w);
    if (l >= N && tau < peak - 160.0) break;
    if (l > 20000000)
      throw ConvergenceFailure("weight support did not decay; check T > 0");
  }
  const std::size_t L = lw.size();
  const double shift = *std::max_element(lw.begin(), lw.end());
  std::vector<long double> W(L), x(L);
  for (std::size_t l = 0; l < L; ++l) {
    W[l] = expl(static_cast<long double>(lw[l] - shift));
    x[l] = static_cast<long double>(l);
  }
  // Stieltjes three-term recurrence: log det[m_{i+j}] = sum_k log h_k.
  std::vector<long double> p_prev(L, 0.0L), p_cur(L, 1.0L), p_next(L);
  long double h_prev = 0.0L;
  double log_det = 0.0;
  for (int k = 0; k < N; ++k) {
    long double hk = 0.0L, xk = 0.0L;
    for (std::size_t l = 0; l < L; ++l) {
      const long double q = W[l] * p_cur[l] * p_cur[l];
      hk += q;
      xk += x[l] * q;
    }
    if (!(hk > 0.0L) || !std::isfinite(static_cast<double>(hk)))
      throw ConvergenceFailure("orthogonal-polynomial recurrence lost positivity");
    log_det += static_cast<double>(logl(hk)) + shift;
    if (k == N - 1) break;
    const long double ak = xk / hk;
    const long double bk = (k == 0) ? 0.0L : hk / h_prev;
    for (std::size_t l = 0; l < L; ++l)
      p_next[l] = (x[l] - ak) * p_cur[l] - bk * p_prev[l];
    p_prev.swap(p_cur);
    p_cur.swap(p_next);
    h_prev = hk;
  }
  return -0.5 * t * casimir_const3(N) - 0.5 * N * (N - 1.0) * log_r -
         2.0 * log_superfactorial(N) + log_det;
}

YmEnclosure ym_free_energy_enclosure(double T, int N) {
  validate_temperature(T);
  if (!(T > 0.0)) throw UsageError("the enclosure requires T > 0");
  if (N < 1) throw UsageError("N must be >= 1");
  const double t = T / N;
  const double n2 = static_cast<double>(N) * N;
  const HillClimb modal = climb_modal(t, N);
  // Upper: Z = e^{-(t/2) c3} sf^{-2} det[m_{i+j}] exactly (Hankel moments of
  // the weight), and Hadamard bounds the determinant by the product of column
  // norms:  log Z <= -(t/2) c3 - 2 log sf + sum_j (1/2) log sum_i m_{i+j}^2.
  const int kmax = 2 * N - 2;
  // support cutoff driven by the heaviest moment integrand l^kmax w(l)
  std::int64_t L = 0;
  double peak = -std::numeric_limits<double>::infinity();
  for (std::int64_t l = 0;; ++l) {
    const double tau = log_weight(l, t, N, 0.0) +
                       kmax * std::log(std::max<double>(static_cast<double>(l), 1.0));
    peak = std::max(peak, tau);
    if (l >= N && tau < peak - 160.0) {
      L = l;
      break;
    }
    if (l > 20000000) throw ConvergenceFailure("weight support did not decay");
  }
  std::vector<double> log_m(kmax + 1);
  std::vector<double> expo(static_cast<std::size_t>(L) + 1);
  for (int k = 0; k <= kmax; ++k) {
    for (std::int64_t l = 0; l <= L; ++l)
      expo[static_cast<std::size_t>(l)] =
          (k == 0 || l > 0)
              ? log_weight(l, t, N, 0.0) + k * std::log(std::max<double>(static_cast<double>(l), 1.0))
              : -std::numeric_limits<double>::infinity();
    log_m[k] = log_sum_exp(expo);
  }
  double log_det_bound = 0.0;
  for (int j = 0; j < N; ++j) {
    std::vector<double> sq(N);
    for (int i = 0; i < N; ++i) sq[i] = 2.0 * log_m[i + j];
    log_det_bound += 0.5 * log_sum_exp(sq);
  }
  const double upper =
      (-0.5 * t * casimir_const3(N) - 2.0 * log_superfactorial(N) + log_det_bound) / n2;
  return YmEnclosure{modal.value / n2, upper, modal.shape};
}

std::vector<YmTrendRow> ym_free_energy_trend(const DiscreteMeasure& mu_A,
                                             const DiscreteMeasure& mu_B, double T,
                                             const std::vector<int>& N_list,
                                             const YmTrendOptions& opts) {
  validate_temperature(T);
  if (!(T > 0.0))
    throw UsageError(
        "the free-energy trend requires T > 0 (use ym_partition for T = 0)");
  if (N_list.empty()) throw EmptyInput("N_list is empty");
  for (const DiscreteMeasure* mu : {&mu_A, &mu_B})
    if (!(mu->min_position() > 0.0) || mu->max_position() > 1.0 + 1e-12)
      throw HypothesisViolation("marginal supports must lie in (0, 1]");
  std::vector<YmTrendRow> rows;
  rows.reserve(N_list.size());
  for (int N : N_list) {
    if (N < 1) throw UsageError("every N must be >= 1");
    SpectrumSet A(paper_quantiles(mu_A, N)), B(paper_quantiles(mu_B, N));
    const bool a_const = A.range() <= 1e-12, b_const = B.range() <= 1e-12;
    // Per-N side: certified truncation when the K rule allows, else exact.
    double log_z;
    std::int64_t K = -1;
    try {
      K = ym_choose_k(A, B, opts.tail_tol, opts.k_cap);
    } catch (const TailNotCertified&) {
      K = -1;
    } catch (const RadiusViolation&) {
      K = -1;
    }
    if (K >= 0)
      log_z = std::log(ym_partition(A, B, T, N, K).value);
    else if (a_const && b_const)
      log_z = ym_log_partition_ones(T, N, A.max() * B.max());
    else
      log_z = ym_log_partition_exact(A, B, T, N);
    const double n2 = static_cast<double>(N) * N;
    const double fe = log_z / n2;
    // Variational side with the exact finite-N constants.
    Potential c_n({0.0, -0.5 * T * (1.0 - 1.0 / N), 0.5 * T});
    EnsembleSpec ens(1.0, 1.0, mu_A, mu_B, c_n);
    const MinimizeResult mr = minimize_over_L(ens, opts.grid);
    const double s_a = s_functional_finite(A.values());
    const double s_b = s_functional_finite(B.values());
    const double const_n =
        -(2.0 / n2) * log_czn(N) - T * (N - 1.0) * (N - 2.0) / (12.0 * n2);
    const double lift = 0.5 * (s_a + s_b) + const_n;
    const double cont_lo = -mr.value.bracket_tilde.hi + lift;
    const double cont_hi = -mr.value.bracket_tilde.lo + lift;
    double var_lo = cont_lo, var_hi = cont_hi;
    if (a_const && b_const && A.max() * B.max() >= 1.0 - 1e-12) {
      const YmEnclosure enc = ym_free_energy_enclosure(T, N);
      var_lo = enc.lower;
      var_hi = enc.upper;
    }
    const double gap = std::max(0.0, std::max(var_lo - fe, fe - var_hi));
    rows.push_back(YmTrendRow{N, fe, var_lo, var_hi, cont_lo, cont_hi, gap});
  }
  return rows;
}

}  // namespace charex
