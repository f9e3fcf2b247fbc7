#include "charex/ratefun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "charex/parallel.hpp"

namespace charex {

// ------------------------------------------------------------------ kernels

double s_kernel(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0))
    throw NonPositiveInput("s(x, y) needs x, y > 0; got x = " + std::to_string(x) +
                           ", y = " + std::to_string(y));
  const double sum = x + y;
  const double diff = x - y;
  if (std::abs(diff) < 1e-6 * sum) {
    // (log x - log y)/(x - y) = (2/(x+y)) (1 + u^2/3 + u^4/5 + ...), u = diff/sum
    const double u2 = (diff / sum) * (diff / sum);
    return (2.0 / sum) * (1.0 + u2 / 3.0 + u2 * u2 / 5.0);
  }
  return (std::log(x) - std::log(y)) / diff;
}

namespace {

// Antiderivatives used for exact cell-pair integrals of log u; both extend
// continuously to 0 at u = 0.
inline double anti_log(double u) { return u <= 0.0 ? 0.0 : u * std::log(u) - u; }
inline double anti_ulog(double u) {
  return u <= 0.0 ? 0.0 : 0.5 * u * u * std::log(u) - 0.25 * u * u;
}
// integral over [lo, hi] of (u - a) log u du
inline double int_rise_log(double a, double lo, double hi) {
  return (anti_ulog(hi) - a * anti_log(hi)) - (anti_ulog(lo) - a * anti_log(lo));
}
// integral over [lo, hi] of (b - u) log u du
inline double int_fall_log(double b, double lo, double hi) {
  return (b * anti_log(hi) - anti_ulog(hi)) - (b * anti_log(lo) - anti_ulog(lo));
}

}  // namespace

double cell_pair_log(int k, double dx) {
  // The gap u = x - y of two cells k apart has the triangular density
  // dx - |u - k dx| on [(k-1) dx, (k+1) dx]; integrate log u against it.
  const double lo = (k - 1) * dx;
  const double mid = k * dx;
  const double hi = (k + 1) * dx;
  return int_rise_log(lo, lo, mid) + int_fall_log(hi, mid, hi);
}

double log_energy(const GridMeasure& nu) {
  const int n = nu.cells();
  const double dx = nu.dx();
  const double log_dx = std::log(dx);
  std::vector<double> pair_k(n, 0.0);  // exact pair integral / dx^2, k cells apart
  const double inv_dx2 = 1.0 / (dx * dx);
  for (int k = 1; k < n; ++k) pair_k[k] = cell_pair_log(k, dx) * inv_dx2;
  std::vector<double> w(n);
  for (int k = 0; k < n; ++k) w[k] = nu.rho(k) * dx;

  std::vector<double> rows(n);
  std::vector<double> row;
  for (int i = 0; i < n; ++i) {
    row.clear();
    row.push_back(w[i] * w[i] * (log_dx - 1.5));  // exact self-cell energy
    for (int j = i + 1; j < n; ++j) row.push_back(2.0 * w[i] * w[j] * pair_k[j - i]);
    rows[i] = par::pairwise_sum(row);
  }
  return par::pairwise_sum(rows);
}

double s_functional(const DiscreteMeasure& mu) {
  if (!(mu.min_position() > 0.0))
    throw NonPositiveInput("S(mu) needs support in (0, inf); min atom = " +
                           std::to_string(mu.min_position()));
  const std::size_t n = mu.size();
  const std::vector<double>& p = mu.positions();
  const std::vector<double>& w = mu.weights();
  std::vector<double> rows(n);
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    row.push_back(w[i] * w[i] * std::log(s_kernel(p[i], p[i])));
    for (std::size_t j = i + 1; j < n; ++j)
      row.push_back(2.0 * w[i] * w[j] * std::log(s_kernel(p[i], p[j])));
    rows[i] = par::pairwise_sum(row);
  }
  return par::pairwise_sum(rows);
}

double s_functional_finite(const std::vector<double>& points) {
  const std::size_t n = points.size();
  if (n < 2) return 0.0;
  for (double x : points)
    if (!(x > 0.0)) throw NonPositiveInput("S_N needs points > 0");
  std::vector<double> rows(n);
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = i + 1; j < n; ++j) row.push_back(std::log(s_kernel(points[i], points[j])));
    rows[i] = par::pairwise_sum(row);
  }
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  return 2.0 * par::pairwise_sum(rows) / nn;
}

// --------------------------------------------------------------- ensembles

BoundedFunctional BoundedFunctional::constant(double v) {
  BoundedFunctional F;
  F.f0 = v;
  return F;
}

BoundedFunctional BoundedFunctional::linear(double w1, BoundedFn f) {
  BoundedFunctional F;
  F.w1 = w1;
  F.f = f;
  return F;
}

BoundedFunctional BoundedFunctional::quadratic(double f0, double w1, double w2, BoundedFn f) {
  BoundedFunctional F;
  F.f0 = f0;
  F.w1 = w1;
  F.w2 = w2;
  F.f = f;
  return F;
}

double BoundedFunctional::eval(const GridMeasure& nu) const {
  if (w1 == 0.0 && w2 == 0.0) return f0;
  const double m = nu.integrate([&](double x) { return f.eval(x); });
  return f0 + w1 * m + w2 * m * m;
}

double BoundedFunctional::eval(const DiscreteMeasure& nu) const {
  if (w1 == 0.0 && w2 == 0.0) return f0;
  double m = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) m += nu.weights()[i] * f.eval(nu.positions()[i]);
  return f0 + w1 * m + w2 * m * m;
}

double BoundedFunctional::certified_sup() const {
  const double B = std::max(std::abs(f.inf()), std::abs(f.sup()));
  return std::abs(f0) + std::abs(w1) * B + std::abs(w2) * B * B;
}

EnsembleSpec::EnsembleSpec(double a_, double b_, DiscreteMeasure mu_A_, DiscreteMeasure mu_B_,
                           Potential c_, BoundedFunctional F_)
    : a(a_), b(b_), mu_A(std::move(mu_A_)), mu_B(std::move(mu_B_)), c(std::move(c_)),
      F(std::move(F_)) {
  if (a < 0.0 || b < 0.0) throw HypothesisViolation("ensemble weights a, b must be nonnegative");
  if (!(mu_A.min_position() > 0.0) || mu_A.max_position() > 1.0 + 1e-12)
    throw HypothesisViolation("mu_A must be supported in (0, 1]");
  if (!(mu_B.min_position() > 0.0) || mu_B.max_position() > 1.0 + 1e-12)
    throw HypothesisViolation("mu_B must be supported in (0, 1]");
}

double g_value(double x, double y, const EnsembleSpec& ens) {
  const double kappa = ens.kappa();
  if (kappa > 0.0 && x == y) return std::numeric_limits<double>::infinity();
  double v = 0.5 * (ens.c.eval(x) + ens.c.eval(y));
  if (kappa > 0.0) v -= kappa * std::log(std::abs(x - y));
  return v;
}

GrowthBound g_lower_bound(const EnsembleSpec& ens) {
  // c(x)/2 + c(y)/2 >= rho (x+y)/2 + floor, and for x, y >= 0
  // -log|x-y| >= -log(x+y), so with beta = rho/2 - slope:
  //   g >= slope (x+y) + floor + min_u { -kappa log u + beta u }
  // and the minimum is kappa (1 + log(beta/kappa)).
  const double rho = ens.c.growth_rho();
  const double floor = ens.c.growth_floor();
  const double kappa = ens.kappa();
  GrowthBound gb;
  if (kappa == 0.0) {
    gb.slope = 0.5 * rho;
    gb.offset = floor;
    return gb;
  }
  gb.slope = 0.25 * rho;
  const double beta = 0.25 * rho;
  gb.offset = floor + kappa * (1.0 + std::log(beta / kappa));
  return gb;
}

// --------------------------------------------------------- rate functionals

ITerm i_term(const DiscreteMeasure& mu_log, const GridMeasure& nu, const std::vector<int>& N_ref) {
  ITerm out;
  const double spread = mu_log.max_position() - mu_log.min_position();
  const double scale = std::max(1.0, std::abs(mu_log.max_position()));
  if (spread <= 1e-14 * scale) {
    // I(delta_d, nu) = d int x dnu exactly: I_N(d Id, E) = exp(N d tr E).
    const double d = mu_log.moment(1);
    out.estimate = d * nu.moment(1);
    out.bracket = {out.estimate, out.estimate};
    out.exact = true;
    return out;
  }
  const LimitEstimate est = spherical_limit_estimate(mu_log, nu, N_ref);
  out.estimate = est.estimate;
  out.bracket = {est.jensen_lo, est.jensen_hi};
  out.exact = false;
  return out;
}

namespace {

void require_in_class(const GridMeasure& nu) {
  if (!nu.in_density_class(1.0, 1e-9))
    throw NotInL("nu has a density cell above the unit cap: the functional is +infinity "
                 "outside the constrained class");
}

void require_positive_support(const GridMeasure& nu) {
  if (nu.x0() < -1e-12) throw HypothesisViolation("nu must be supported in R^+");
}

}  // namespace

RateReport rate_H(const GridMeasure& nu, const EnsembleSpec& ens, const std::vector<int>& N_ref) {
  require_in_class(nu);
  require_positive_support(nu);

  const double kappa = ens.kappa();
  const double int_c = nu.integrate([&](double x) { return ens.c.eval(x); });
  const double sigma = log_energy(nu);
  const double F_val = ens.F.eval(nu);
  const double S_A = s_functional(ens.mu_A);
  const double S_B = s_functional(ens.mu_B);

  auto log_push = [](const DiscreteMeasure& mu) {
    return mu.map([](double x) { return std::log(x); });
  };
  const ITerm IA = ens.a > 0.0 ? i_term(log_push(ens.mu_A), nu, N_ref) : ITerm{0.0, {0.0, 0.0}, true};
  const ITerm IB = ens.b > 0.0 ? i_term(log_push(ens.mu_B), nu, N_ref) : ITerm{0.0, {0.0, 0.0}, true};

  RateReport rep;
  const double base = int_c - kappa * sigma - F_val;
  rep.value_tilde = base - ens.a * IA.estimate - ens.b * IB.estimate;
  rep.bracket_tilde = {base - ens.a * IA.bracket.hi - ens.b * IB.bracket.hi,
                       base - ens.a * IA.bracket.lo - ens.b * IB.bracket.lo};
  const double s_shift = -0.5 * ens.a * S_A - 0.5 * ens.b * S_B;
  rep.value = rep.value_tilde + s_shift;
  rep.bracket = {rep.bracket_tilde.lo + s_shift, rep.bracket_tilde.hi + s_shift};

  rep.components["int_c"] = int_c;
  rep.components["sigma"] = sigma;
  rep.components["f"] = F_val;
  rep.components["i_a"] = IA.estimate;
  rep.components["i_a_lo"] = IA.bracket.lo;
  rep.components["i_b"] = IB.estimate;
  rep.components["i_b_lo"] = IB.bracket.lo;
  rep.components["s_a"] = S_A;
  rep.components["s_b"] = S_B;
  rep.components["kappa"] = kappa;
  rep.grid_x0 = nu.x0();
  rep.grid_dx = nu.dx();
  rep.grid_cells = nu.cells();
  return rep;
}

double h_cutoff(const GridMeasure& nu, const EnsembleSpec& ens, double M,
                const std::vector<int>& N_ref) {
  if (!std::isfinite(M) || M < 0.0) throw UsageError("cutoff level M must be finite and >= 0");
  require_in_class(nu);
  require_positive_support(nu);

  const double kappa = ens.kappa();
  const int n = nu.cells();
  const double dx = nu.dx();

  // Exact antiderivative of (dx - u) log u: P'(u) = (dx - u) log u, P(0) = 0.
  auto P = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double lu = std::log(u);
    return dx * (u * lu - u) - 0.5 * u * u * lu + 0.25 * u * u;
  };

  std::vector<double> mids(n), cmid(n), w(n);
  for (int k = 0; k < n; ++k) {
    mids[k] = nu.mid(k);
    cmid[k] = ens.c.eval(mids[k]);
    w[k] = nu.rho(k) * dx;
  }

  std::vector<double> rows(n);
  std::vector<double> row;
  for (int i = 0; i < n; ++i) {
    row.clear();
    // Diagonal cell: integrate min(g, M) exactly over the cell square with
    // the potential frozen at the midpoint (g >= M exactly on |x-y| <= delta).
    if (kappa == 0.0) {
      row.push_back(w[i] * w[i] * std::min(cmid[i], M));
    } else {
      const double t = (M - cmid[i]) / kappa;
      const double delta = t > 700.0 ? 0.0 : std::min(dx, std::exp(-t));
      const double area_in = 2.0 * dx * delta - delta * delta;
      const double t_log = -2.0 * (P(dx) - P(delta));
      const double cell =
          M * area_in + kappa * t_log + cmid[i] * (dx * dx - area_in);
      row.push_back(nu.rho(i) * nu.rho(i) * cell);
    }
    // Cross cells: integrate min(kappa (-log|x-y|) + cbar, M) exactly over the
    // cell pair (potential frozen at the midpoint average), matching the exact
    // pair integrals used by log_energy so that sup_M H^M = H-tilde.
    for (int j = i + 1; j < n; ++j) {
      const double cbar = 0.5 * (cmid[i] + cmid[j]);
      double cell;
      if (kappa == 0.0) {
        cell = dx * dx * std::min(cbar, M);
      } else {
        const int k = j - i;
        const double lo = (k - 1) * dx;
        const double mid_u = k * dx;
        const double hi = (k + 1) * dx;
        const double t = (M - cbar) / kappa;
        const double delta = t > 700.0 ? 0.0 : std::exp(-t);
        const double s1 = std::clamp(delta, lo, mid_u);
        const double s2 = std::clamp(delta, mid_u, hi);
        const double area_in = 0.5 * (s1 - lo) * (s1 - lo) +
                               hi * (s2 - mid_u) - 0.5 * (s2 * s2 - mid_u * mid_u);
        const double log_out = int_rise_log(lo, s1, mid_u) + int_fall_log(hi, s2, hi);
        cell = M * area_in - kappa * log_out + cbar * (dx * dx - area_in);
      }
      row.push_back(2.0 * nu.rho(i) * nu.rho(j) * cell);
    }
    rows[i] = par::pairwise_sum(row);
  }
  const double gm_integral = par::pairwise_sum(rows);

  auto log_push = [](const DiscreteMeasure& mu) {
    return mu.map([](double x) { return std::log(x); });
  };
  const ITerm IA = ens.a > 0.0 ? i_term(log_push(ens.mu_A), nu, N_ref) : ITerm{0.0, {0.0, 0.0}, true};
  const ITerm IB = ens.b > 0.0 ? i_term(log_push(ens.mu_B), nu, N_ref) : ITerm{0.0, {0.0, 0.0}, true};
  return gm_integral - ens.F.eval(nu) - ens.a * IA.estimate - ens.b * IB.estimate;
}

// --------------------------------------------- model rate functionals (LDP)

ModelFunctionals model_functionals(const GridMeasure& nu, const GridMeasure& mu,
                                   const ModelSpec& spec, const std::vector<int>& N_ref) {
  require_in_class(nu);
  require_positive_support(nu);
  if (!(spec.A.min() > 0.0) || !(spec.B.min() > 0.0))
    throw NonPositiveInput("model_functionals needs strictly positive A and B spectra "
                           "for the log pushforward");

  auto log_atoms = [](const SpectrumSet& S) {
    std::vector<double> pos(S.values());
    for (double& x : pos) x = std::log(x);
    return DiscreteMeasure::uniform_atoms(pos);
  };

  ModelFunctionals out;

  // G_Phi(nu) = -I(log# mu_A, nu) - I(log# mu_B, nu) - Sigma(nu) + rho_Phi int x dnu.
  const ITerm IA = i_term(log_atoms(spec.A), nu, N_ref);
  const ITerm IB = i_term(log_atoms(spec.B), nu, N_ref);
  const double sigma_nu = log_energy(nu);
  const double mean_nu = nu.moment(1);
  const double rho_phi = spec.phi.rho();
  const double g_base = -sigma_nu + rho_phi * mean_nu;
  out.g_phi = g_base - IA.estimate - IB.estimate;
  out.g_phi_bracket = {g_base - IA.bracket.hi - IB.bracket.hi,
                       g_base - IA.bracket.lo - IB.bracket.lo};

  // J_Phi(nu, mu) = -I(log Psi # mu, nu) - S(Psi # mu)/2 - Sigma(mu) + int x^2 dmu / 2.
  const DiscreteMeasure mu_atoms = mu.to_atoms();
  const double norm = spec.phi.norm();
  const DiscreteMeasure psi_push =
      mu_atoms.map([&](double x) { return spec.phi.eval(x) / norm; });
  const DiscreteMeasure log_psi_push = psi_push.map([](double x) { return std::log(x); });
  const ITerm IP = i_term(log_psi_push, nu, N_ref);
  const double S_psi = s_functional(psi_push);
  const double sigma_mu = log_energy(mu);
  const double m2 = mu.moment(2);
  const double j_base = -0.5 * S_psi - sigma_mu + 0.5 * m2;
  out.j_phi = j_base - IP.estimate;
  out.j_phi_bracket = {j_base - IP.bracket.hi, j_base - IP.bracket.lo};

  out.components["i_a"] = IA.estimate;
  out.components["i_b"] = IB.estimate;
  out.components["i_psi"] = IP.estimate;
  out.components["sigma_nu"] = sigma_nu;
  out.components["sigma_mu"] = sigma_mu;
  out.components["s_psi"] = S_psi;
  out.components["rho_phi"] = rho_phi;
  out.components["mean_nu"] = mean_nu;
  out.components["moment2_mu"] = m2;
  return out;
}

// --------------------------------------------------- bounded-Lipschitz metric

namespace {

struct SignedAtoms {
  std::vector<double> x;   // merged support, strictly ascending
  std::vector<double> xi;  // mu - nu weights
};

SignedAtoms merged_support(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<std::pair<double, double>> all;
  all.reserve(mu.size() + nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    all.emplace_back(mu.positions()[i], mu.weights()[i]);
  for (std::size_t i = 0; i < nu.size(); ++i)
    all.emplace_back(nu.positions()[i], -nu.weights()[i]);
  std::sort(all.begin(), all.end(),
            [](const auto& p, const auto& q) { return p.first < q.first; });
  SignedAtoms out;
  for (const auto& [p, w] : all) {
    if (!out.x.empty() && p == out.x.back()) {
      out.xi.back() += w;
    } else {
      out.x.push_back(p);
      out.xi.push_back(w);
    }
  }
  return out;
}

// Concave piecewise-linear function on [xs.front(), xs.back()].
struct PL {
  std::vector<double> xs, vs;
};

double pl_eval(const PL& p, double x) {
  const auto it = std::upper_bound(p.xs.begin(), p.xs.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - p.xs.begin());
  hi = std::min(std::max<std::size_t>(hi, 1), p.xs.size() - 1);
  const std::size_t lo = hi - 1;
  const double width = p.xs[hi] - p.xs[lo];
  if (width <= 0.0) return std::max(p.vs[lo], p.vs[hi]);
  const double t = std::clamp((x - p.xs[lo]) / width, 0.0, 1.0);
  return p.vs[lo] + (p.vs[hi] - p.vs[lo]) * t;
}

// Index range [ilo, ihi] of the (possibly flat) maximum.
std::pair<std::size_t, std::size_t> pl_peak(const PL& p) {
  std::size_t ilo = 0;
  for (std::size_t i = 1; i < p.vs.size(); ++i)
    if (p.vs[i] > p.vs[ilo]) ilo = i;
  std::size_t ihi = ilo;
  while (ihi + 1 < p.vs.size() && p.vs[ihi + 1] == p.vs[ilo]) ++ihi;
  while (ilo > 0 && p.vs[ilo - 1] == p.vs[ihi]) --ilo;
  return {ilo, ihi};
}

// W(f) = max_{|u - f| <= r} V(u), restricted to [-s, s], plus the linear
// term xi f.  Preserves concavity.
PL pl_step(const PL& v, double r, double s, double xi) {
  const auto [ilo, ihi] = pl_peak(v);
  PL w;
  w.xs.reserve(v.xs.size() + 2);
  w.vs.reserve(v.vs.size() + 2);
  for (std::size_t i = 0; i <= ilo; ++i) {
    w.xs.push_back(v.xs[i] - r);
    w.vs.push_back(v.vs[i]);
  }
  w.xs.push_back(v.xs[ihi] + r);
  w.vs.push_back(v.vs[ihi]);
  for (std::size_t i = ihi + 1; i < v.xs.size(); ++i) {
    w.xs.push_back(v.xs[i] + r);
    w.vs.push_back(v.vs[i]);
  }
  PL c;
  c.xs.push_back(-s);
  c.vs.push_back(pl_eval(w, -s));
  for (std::size_t i = 0; i < w.xs.size(); ++i) {
    if (w.xs[i] > -s && w.xs[i] < s) {
      c.xs.push_back(w.xs[i]);
      c.vs.push_back(w.vs[i]);
    }
  }
  c.xs.push_back(s);
  c.vs.push_back(pl_eval(w, s));
  for (std::size_t i = 0; i < c.xs.size(); ++i) c.vs[i] += xi * c.xs[i];
  return c;
}

double chain_value(const SignedAtoms& m, double s, double L, std::vector<PL>* store) {
  if (s <= 1e-300) return 0.0;
  PL v;
  v.xs = {-s, s};
  v.vs = {-s * m.xi[0], s * m.xi[0]};
  if (store) store->push_back(v);
  for (std::size_t i = 1; i < m.x.size(); ++i) {
    const double r = L * (m.x[i] - m.x[i - 1]);
    v = pl_step(v, r, s, m.xi[i]);
    if (store) store->push_back(v);
  }
  return *std::max_element(v.vs.begin(), v.vs.end());
}

std::vector<double> chain_backtrack(const SignedAtoms& m, double s, double L,
                                    const std::vector<PL>& store) {
  const std::size_t n = m.x.size();
  std::vector<double> f(n, 0.0);
  if (s <= 1e-300) return f;
  auto peak_range = [](const PL& p) {
    const auto [ilo, ihi] = pl_peak(p);
    return std::pair<double, double>{p.xs[ilo], p.xs[ihi]};
  };
  {
    const auto [plo, phi] = peak_range(store[n - 1]);
    f[n - 1] = 0.5 * (plo + phi);
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    const double r = L * (m.x[i + 1] - m.x[i]);
    const double wlo = std::max(-s, f[i + 1] - r);
    const double whi = std::min(s, f[i + 1] + r);
    const auto [plo, phi] = peak_range(store[i]);
    const double lo = std::max(plo, wlo), hi = std::min(phi, whi);
    if (lo <= hi) {
      f[i] = std::clamp(f[i + 1], lo, hi);
    } else {
      f[i] = (phi < wlo) ? wlo : whi;
    }
  }
  return f;
}

}  // namespace

BLResult bl_distance_detail(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            MetricKind kind) {
  const SignedAtoms m = merged_support(mu, nu);
  const std::size_t n = m.x.size();
  BLResult out;
  out.support = m.x;
  out.f.assign(n, 0.0);

  double total_abs = 0.0;
  for (double xi : m.xi) total_abs += std::abs(xi);
  if (total_abs <= 1e-15 || n == 1) {
    out.sup_budget = (kind == MetricKind::bounded_lipschitz) ? 1.0 : 0.0;
    out.lip_budget = (kind == MetricKind::bounded_lipschitz) ? 0.0 : 1.0;
    return out;
  }

  if (kind == MetricKind::lipschitz_only) {
    // Kantorovich dual: W1 = int |F_mu - F_nu| via the prefix sums; the
    // optimal f has slope -sign(cum) on each gap.
    double cum = 0.0, dist = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      cum += m.xi[i];
      const double gap = m.x[i + 1] - m.x[i];
      dist += std::abs(cum) * gap;
      const double step = (cum > 0.0) ? -gap : (cum < 0.0 ? gap : 0.0);
      out.f[i + 1] = out.f[i] + step;
    }
    out.distance = dist;
    out.lip_budget = 1.0;
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) obj += m.xi[i] * out.f[i];
    out.feasibility_error = std::abs(obj - dist);
    return out;
  }

  // Bounded-Lipschitz: value(L) with s = 1 - L is concave in L.
  auto value_at = [&](double L) { return chain_value(m, 1.0 - L, L, nullptr); };
  double lo = 0.0, hi = 1.0;
  for (int iter = 0; iter < 300; ++iter) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (value_at(m1) < value_at(m2))
      lo = m1;
    else
      hi = m2;
  }
  const double L = 0.5 * (lo + hi), s = 1.0 - L;
  std::vector<PL> store;
  store.reserve(n);
  out.distance = std::max(0.0, chain_value(m, s, L, &store));
  out.f = chain_backtrack(m, s, L, store);
  out.sup_budget = s;
  out.lip_budget = L;

  // Feasibility certificate for the returned test function.
  double err = 0.0, obj = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    err = std::max(err, std::abs(out.f[i]) - s);
    obj += m.xi[i] * out.f[i];
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double gap = m.x[i + 1] - m.x[i];
    if (gap > 0.0) err = std::max(err, std::abs(out.f[i + 1] - out.f[i]) - L * gap);
  }
  err = std::max(err, std::abs(obj - out.distance));
  out.feasibility_error = err;
  return out;
}

double bl_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, MetricKind kind) {
  return bl_distance_detail(mu, nu, kind).distance;
}
double bl_distance(const GridMeasure& mu, const GridMeasure& nu, MetricKind kind) {
  return bl_distance(mu.to_atoms(), nu.to_atoms(), kind);
}
double bl_distance(const GridMeasure& mu, const DiscreteMeasure& nu, MetricKind kind) {
  return bl_distance(mu.to_atoms(), nu, kind);
}
double bl_distance(const DiscreteMeasure& mu, const GridMeasure& nu, MetricKind kind) {
  return bl_distance(mu, nu.to_atoms(), kind);
}

}  // namespace charex
