#include "charex/spherical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "charex/detail/logdet.hpp"
#include "charex/parallel.hpp"

namespace charex {

namespace {

// Pairwise log-Vandermonde of ascending distinct values.
double log_vandermonde(const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) s += std::log(v[j] - v[i]);
  return s;
}

// Magnitude scale of a spectrum: max of range, |endpoints|, and 1.
double spectrum_scale(const std::vector<double>& v) {
  return std::max({v.back() - v.front(), std::abs(v.front()), std::abs(v.back()), 1.0});
}

// Total vanishing order of the Vandermonde at near-ties: sum of C(m, 2)
// over maximal runs with gap < 1e-6 * scale.  The determinant evaluator
// loses this many factors of the split spacing, so the spacing has to be
// chosen against an extended-precision budget of ~20 decimal digits.
int tie_pairs(const std::vector<double>& v, double scale) {
  int pairs = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] - v[j] < 1e-6 * scale) ++j;
    int m = static_cast<int>(j - i + 1);
    pairs += m * (m - 1) / 2;
    i = j + 1;
  }
  return pairs;
}

// Relative split spacing that keeps the determinant suppression
// eps^pairs above ~1e-20 (safe for the quad elimination).
double split_factor(int pairs_total) {
  if (pairs_total <= 0) return 1e-8;
  return std::pow(10.0, -std::min(8.0, 20.0 / pairs_total));
}

// Downward-only tie splitting: every output value <= its input, ascending
// with spacing >= eps.  Used where an inequality needs the perturbed
// spectrum to stay elementwise below the original.
std::vector<double> push_down_distinct(std::vector<double> v, double eps, double& moved) {
  moved = 0.0;
  for (int i = static_cast<int>(v.size()) - 2; i >= 0; --i) {
    double cap = v[i + 1] - eps;
    if (v[i] > cap) {
      moved += v[i] - cap;
      v[i] = cap;
    }
  }
  return v;
}

// Upward-only mirror of push_down_distinct (outputs >= inputs).
std::vector<double> push_up_distinct(std::vector<double> v, double eps, double& moved) {
  moved = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    double floor_i = v[i - 1] + eps;
    if (v[i] < floor_i) {
      moved += floor_i - v[i];
      v[i] = floor_i;
    }
  }
  return v;
}

}  // namespace

SpectrumSet::SpectrumSet(std::vector<double> values) : v_(std::move(values)) {
  if (v_.empty()) throw EmptyInput("spectrum needs at least one eigenvalue");
  for (double x : v_)
    if (!std::isfinite(x)) throw InvalidMeasure("spectrum entries must be finite");
  std::sort(v_.begin(), v_.end());
}

SpectrumSet SpectrumSet::constant(int N, double v) {
  if (N < 1) throw EmptyInput("spectrum needs N >= 1");
  return SpectrumSet(std::vector<double>(N, v));
}

double SpectrumSet::sum() const {
  double s = 0.0;
  for (double x : v_) s += x;
  return s;
}

double SpectrumSet::sup_abs() const {
  return std::max(std::abs(v_.front()), std::abs(v_.back()));
}

double SpectrumSet::min_spacing() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < v_.size(); ++i) m = std::min(m, v_[i + 1] - v_[i]);
  return m;
}

SpectrumSet SpectrumSet::map_log() const {
  if (v_.front() <= 0.0) throw NonPositiveInput("log of a nonpositive spectrum");
  std::vector<double> out(v_.size());
  for (std::size_t i = 0; i < v_.size(); ++i) out[i] = std::log(v_[i]);
  return SpectrumSet(std::move(out));
}

SpectrumSet SpectrumSet::capped(double M) const {
  std::vector<double> out(v_.size());
  for (std::size_t i = 0; i < v_.size(); ++i) out[i] = std::min(v_[i], M);
  return SpectrumSet(std::move(out));
}

SpectrumSet SpectrumSet::perturb_ties(double eps, bool& perturbed) const {
  perturbed = false;
  if (v_.size() < 2) return *this;
  std::vector<double> out = v_;
  std::size_t i = 0;
  while (i < out.size()) {
    std::size_t j = i;
    while (j + 1 < out.size() && out[j + 1] - out[j] < eps) ++j;
    if (j > i) {
      perturbed = true;
      double mean = 0.0;
      for (std::size_t k = i; k <= j; ++k) mean += out[k];
      mean /= static_cast<double>(j - i + 1);
      for (std::size_t k = i; k <= j; ++k)
        out[k] = mean + eps * (static_cast<double>(k - i) -
                               0.5 * static_cast<double>(j - i));
    }
    i = j + 1;
  }
  // spreading a cluster can graze its neighbors; restore strict order
  for (std::size_t k = 1; k < out.size(); ++k)
    if (out[k] < out[k - 1] + 0.999 * eps) {
      out[k] = out[k - 1] + eps;
      perturbed = true;
    }
  return SpectrumSet(std::move(out));
}

double log_czn(int N) {
  if (N < 1) throw EmptyInput("log_czn needs N >= 1");
  double s = 0.0;
  for (int p = 1; p < N; ++p) s += std::lgamma(static_cast<double>(p) + 1.0);
  return s - 0.5 * static_cast<double>(N) * (N - 1) * std::log(static_cast<double>(N));
}

namespace {

// Fast exact path: if N*a_j lies on an integer arithmetic progression
// k_j = k_0 + s*j, then with z_i = e^{x_i}
//   det(e^{N x_i a_j}) = det(z_i^{k_j}) = (prod_i z_i^{k_0}) Delta(e^{s x}),
// an all-positive product free of elimination error at any N.
bool hciz_lattice(int N, const std::vector<double>& x, const std::vector<double>& a,
                  double& log_value) {
  const double gate = 1e-9;
  double k0 = std::round(N * a[0]);
  if (std::abs(N * a[0] - k0) > gate) return false;
  double step = std::round(N * a[1] - k0);
  if (step < 1.0) return false;
  for (int j = 1; j < N; ++j) {
    double kj = k0 + step * j;
    if (std::abs(N * a[j] - kj) > gate) return false;
  }
  double sx = 0.0;
  for (double v : x) sx += v;
  double logdet = k0 * sx;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      logdet += step * x[i] + std::log(std::expm1(step * (x[j] - x[i])));
  log_value = log_czn(N) + logdet - log_vandermonde(x) - log_vandermonde(a);
  return true;
}

}  // namespace

SphericalValue hciz_exact(const SpectrumSet& D, const SpectrumSet& E,
                          double eps_spacing_rel) {
  if (D.size() != E.size())
    throw UsageError("hciz_exact needs equal spectrum sizes");
  const int N = D.size();
  if (N == 1)
    return {D.min() * E.min(), 0.0, SphericalMethod::exact_determinant};
  for (const SpectrumSet* s : {&D, &E}) {
    double scale = std::max(s->range(), 1e-300);
    if (s->min_spacing() < eps_spacing_rel * scale)
      throw DegenerateSpectrum("coincident eigenvalues; perturb or use hciz_mc");
  }
  const auto& d = D.values();
  const auto& e = E.values();

  double lv = 0.0;
  if (hciz_lattice(N, d, e, lv) || hciz_lattice(N, e, d, lv))
    return {lv, 0.0, SphericalMethod::exact_determinant};

  // Exact rank-one reduction: centering both spectra halves the exponent
  // spread the elimination has to survive.
  double db = D.mean(), eb = E.mean();
  double rank1 = N * (db * E.sum() + eb * D.sum() - N * db * eb);
  std::vector<double> dc(d), ec(e);
  for (double& v : dc) v -= db;
  for (double& v : ec) v -= eb;

  // row shifts m_i = max_j N dc_i ec_j keep entries in (0, 1]
  std::vector<double> m(N);
  double msum = 0.0;
  for (int i = 0; i < N; ++i) {
    double mi = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < N; ++j) mi = std::max(mi, N * dc[i] * ec[j]);
    m[i] = mi;
    msum += mi;
  }
  int sign = 0;
  double logdet = 0.0;
  bool need_quad = N >= 12 ||
                   D.min_spacing() < 1e-3 * spectrum_scale(d) ||
                   E.min_spacing() < 1e-3 * spectrum_scale(e);
#ifdef CHAREX_HAVE_FLOAT128
  auto run_quad = [&] {
    std::vector<std::vector<__float128>> A(N, std::vector<__float128>(N));
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        A[i][j] = expq(static_cast<__float128>(N) * static_cast<__float128>(dc[i]) *
                           static_cast<__float128>(ec[j]) -
                       static_cast<__float128>(m[i]));
    logdet = detail::logdet_lu_quad(A, sign);
  };
  if (!need_quad) {
    std::vector<std::vector<double>> A(N, std::vector<double>(N));
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) A[i][j] = std::exp(N * dc[i] * ec[j] - m[i]);
    logdet = detail::logdet_lu_double(A, sign);
    if (sign <= 0) run_quad();  // the kernel is totally positive: retry higher up
  } else {
    run_quad();
  }
#else
  {
    std::vector<std::vector<double>> A(N, std::vector<double>(N));
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) A[i][j] = std::exp(N * dc[i] * ec[j] - m[i]);
    logdet = detail::logdet_lu_double(A, sign);
  }
  (void)need_quad;
#endif
  // the exponential kernel on ascending nodes is totally positive
  if (sign <= 0)
    throw ConvergenceFailure("hciz determinant lost all significand precision");
  lv = rank1 + log_czn(N) + msum + logdet - log_vandermonde(d) - log_vandermonde(e);
  return {lv, 0.0, SphericalMethod::exact_determinant};
}

SphericalValue hciz_mc(const SpectrumSet& D, const SpectrumSet& E,
                       std::int64_t samples, RngStream stream) {
  if (D.size() != E.size())
    throw UsageError("hciz_mc needs equal spectrum sizes");
  if (samples < 1) throw EmptyInput("hciz_mc needs samples >= 1");
  const int N = D.size();
  const auto& d = D.values();
  const auto& e = E.values();
  std::vector<double> vals(static_cast<std::size_t>(samples));
  par::parallel_fill(static_cast<std::size_t>(samples), vals.data(), [&](std::size_t s) {
    Eigen::MatrixXcd U = haar_sample(N, stream.substream(static_cast<std::uint64_t>(s)));
    double tr = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) tr += d[i] * e[j] * std::norm(U(i, j));
    return std::exp(N * tr);
  });
  MCEstimate est = mc_reduce(vals);
  return {std::log(est.mean), est.std_err, SphericalMethod::monte_carlo};
}

double schur_via_hciz(const YoungShape& shape, const SpectrumSet& M) {
  if (M.min() <= 0.0) throw NonPositiveInput("schur_via_hciz needs a positive spectrum");
  const int N = M.size();
  LSequence l = l_sequence(shape, N);  // strictly decreasing
  std::vector<double> xl(l.rbegin(), l.rend());
  for (double& x : xl) x /= static_cast<double>(N);
  SpectrumSet E{xl};
  SpectrumSet D = M.map_log();
  SphericalValue iz = hciz_exact(D, E);
  const auto& mv = M.values();
  double log_s_ratio = 0.0;  // log prod_{i<j} (log m_j - log m_i)/(m_j - m_i)
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      log_s_ratio +=
          std::log((std::log(mv[j]) - std::log(mv[i])) / (mv[j] - mv[i]));
  double lv = -log_czn(N) + iz.log_value + log_vandermonde(E.values()) + log_s_ratio;
  return std::exp(lv);
}

SandwichResult cutoff_sandwich(const SpectrumSet& D, const SpectrumSet& E, double M) {
  if (D.size() != E.size())
    throw UsageError("cutoff_sandwich needs equal spectrum sizes");
  if (!D.nonpositive(1e-12))
    throw HypothesisViolation("cutoff_sandwich needs D <= 0");
  if (!E.nonnegative(1e-12))
    throw HypothesisViolation("cutoff_sandwich needs E >= 0");
  const int N = D.size();
  SpectrumSet Ecap = E.capped(M);

  double sd = spectrum_scale(D.values());
  double se = spectrum_scale(E.values());
  double sc = spectrum_scale(Ecap.values());
  int pairs = tie_pairs(D.values(), sd) + tie_pairs(E.values(), se) +
              tie_pairs(Ecap.values(), sc);
  double f = split_factor(pairs);

  SandwichResult r;
  double movedD = 0.0, movedE = 0.0, movedC = 0.0;
  SpectrumSet Dp{push_down_distinct(D.values(), f * sd, movedD)};
  SpectrumSet Ep{push_down_distinct(E.values(), f * se, movedE)};
  SpectrumSet Cp{push_down_distinct(Ecap.values(), f * sc, movedC)};
  r.perturbed = movedD + movedE + movedC > 0.0;

  // Cp <= phi_M(E) <= E elementwise, so for D <= 0
  //   I(Dp, E') >= I(Dp, Cp) exp{-N ||Dp|| tr(E' - Cp)} for any E' >= Cp;
  // tr(E - Cp) >= tr(Ep - Cp) keeps the exponent valid for Ep as well.
  double excess = E.sum() - Cp.sum();
  double normDp = Dp.sup_abs();
  r.mid = hciz_exact(Dp, Ep).log_value;
  r.upper = hciz_exact(Dp, Cp).log_value;
  r.lower = r.upper - static_cast<double>(N) * normDp * excess;

  // perturbations shift each log I by at most N (|dD|_1 max|E| + |D| |dE|_1)
  double emax = std::max(std::abs(E.max()), std::abs(E.min()));
  double slack = 1e-9 * (1.0 + std::abs(r.mid) + std::abs(r.upper)) +
                 2.0 * N * (movedD * emax + normDp * (movedE + movedC));
  if (r.mid > r.upper + slack || r.lower > r.mid + slack)
    throw SandwichViolation("cutoff sandwich inverted: evaluator bug");
  return r;
}

JensenResult jensen_bounds(const SpectrumSet& D, const SpectrumSet& E) {
  if (!D.nonpositive(1e-12))
    throw HypothesisViolation("jensen_bounds needs D <= 0");
  if (!E.nonnegative(1e-12))
    throw HypothesisViolation("jensen_bounds needs E >= 0");
  const int N = D.size();
  JensenResult r;
  r.lower = D.mean() * E.mean();
  r.upper = 0.0;
  r.value = hciz_exact(D, E).log_value / (static_cast<double>(N) * N);
  double tol = 1e-9 * (1.0 + std::abs(r.lower));
  if (r.value < r.lower - tol || r.value > r.upper + tol)
    throw BoundViolation("Jensen bracket violated by the exact evaluator");
  return r;
}

namespace {

GridMeasure reflected(const GridMeasure& mu) {
  std::vector<double> rho(mu.density().rbegin(), mu.density().rend());
  return GridMeasure(-mu.xmax(), mu.dx(), std::move(rho));
}

LimitEstimate limit_from_spectra(
    const std::vector<int>& N_list, double jensen_lo,
    const std::function<std::vector<double>(int)>& d_points,
    const std::function<std::vector<double>(int)>& e_points) {
  if (N_list.size() < 2) throw UsageError("need at least two N values");
  for (std::size_t k = 0; k + 1 < N_list.size(); ++k)
    if (N_list[k + 1] <= N_list[k]) throw UsageError("N_list must ascend");
  if (N_list.front() < 1) throw UsageError("N values must be >= 1");
  LimitEstimate out;
  out.n_values = N_list;
  out.jensen_lo = jensen_lo;
  out.jensen_hi = 0.0;
  for (int N : N_list) {
    std::vector<double> dq = d_points(N);
    std::vector<double> eq = e_points(N);
    double sd = spectrum_scale(dq), se = spectrum_scale(eq);
    int pairs = tie_pairs(dq, sd) + tie_pairs(eq, se);
    double f = split_factor(pairs);
    if (pairs > 0 && f > 0.03)
      throw DegenerateSpectrum(
          "quantile multiplicities too large for the determinant evaluator "
          "at N = " + std::to_string(N) + "; use smaller N or a smoother measure");
    // one-sided splits preserve the sign hypotheses: D moves down, E up
    double movedD = 0.0, movedE = 0.0;
    SpectrumSet D{push_down_distinct(std::move(dq), f * sd, movedD)};
    SpectrumSet E{push_up_distinct(std::move(eq), f * se, movedE)};
    out.perturbed = out.perturbed || movedD + movedE > 0.0;
    double v = hciz_exact(D, E).log_value / (static_cast<double>(N) * N);
    out.per_n.push_back(v);
  }
  // linear Richardson in 1/N on the last two entries
  std::size_t k = N_list.size() - 1;
  double n1 = N_list[k - 1], n2 = N_list[k];
  double v1 = out.per_n[k - 1], v2 = out.per_n[k];
  double extrap = (n2 * v2 - n1 * v1) / (n2 - n1);
  out.estimate = std::min(out.jensen_hi, std::max(out.jensen_lo, extrap));
  return out;
}

}  // namespace

LimitEstimate spherical_limit_estimate(const GridMeasure& mu_D, const GridMeasure& mu_E,
                                       const std::vector<int>& N_list) {
  if (mu_D.xmax() > 1e-12)
    throw HypothesisViolation("mu_D must be supported in R^-");
  if (mu_E.x0() < -1e-12)
    throw HypothesisViolation("mu_E must be supported in R^+");
  GridMeasure neg = reflected(mu_D);
  return limit_from_spectra(
      N_list, mu_D.moment(1) * mu_E.moment(1),
      [&](int N) {
        std::vector<double> q = nested_quantiles(neg, N, neg.xmax());
        std::vector<double> d(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) d[i] = -q[q.size() - 1 - i];
        return d;
      },
      [&](int N) { return nested_quantiles(mu_E, N, mu_E.xmax()); });
}

LimitEstimate spherical_limit_estimate(const DiscreteMeasure& mu_D,
                                       const DiscreteMeasure& mu_E,
                                       const std::vector<int>& N_list) {
  if (mu_D.max_position() > 1e-12)
    throw HypothesisViolation("mu_D must be supported in R^-");
  if (mu_E.min_position() < -1e-12)
    throw HypothesisViolation("mu_E must be supported in R^+");
  return limit_from_spectra(
      N_list, mu_D.moment(1) * mu_E.moment(1),
      [&](int N) { return paper_quantiles(mu_D, N); },
      [&](int N) { return paper_quantiles(mu_E, N); });
}

LimitEstimate spherical_limit_estimate(const DiscreteMeasure& mu_D, const GridMeasure& mu_E,
                                       const std::vector<int>& N_list) {
  if (mu_D.max_position() > 1e-12)
    throw HypothesisViolation("mu_D must be supported in R^-");
  if (mu_E.x0() < -1e-12)
    throw HypothesisViolation("mu_E must be supported in R^+");
  return limit_from_spectra(
      N_list, mu_D.moment(1) * mu_E.moment(1),
      [&](int N) { return paper_quantiles(mu_D, N); },
      [&](int N) { return nested_quantiles(mu_E, N, mu_E.xmax()); });
}

}  // namespace charex
