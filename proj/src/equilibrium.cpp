#include "charex/equilibrium.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "charex/measures.hpp"

namespace charex {

// ------------------------------------------------- quantile discretization

QuantileDiscretization quantile_discretize(const GridMeasure& nu, int N, double L,
                                           bool require_shape) {
  if (N <= 0) throw UsageError("quantile_discretize needs N >= 1");
  if (!(L > 0.0)) throw UsageError("quantile_discretize needs a truncation level L > 0");

  const std::vector<double> asc = nested_quantiles(nu, N, L);
  QuantileDiscretization out{SpectrumSet(asc), {}, {}, true, 0.0, 0.0};

  out.min_scaled_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < N; ++i)
    out.min_scaled_gap = std::min(out.min_scaled_gap, N * (asc[i + 1] - asc[i]));

  // l_i = floor(N a_{i,N}) with a descending; the 1e-9 snap keeps exact grid
  // quantiles (N a integral) from rounding down through the boundary.
  out.l.resize(N);
  for (int i = 0; i < N; ++i)
    out.l[i] = static_cast<std::int64_t>(std::floor(N * asc[N - 1 - i] + 1e-9));

  std::vector<std::int64_t> parts(N);
  for (int i = 0; i < N; ++i) {
    if (out.l[i] < 0 || (i + 1 < N && out.l[i] <= out.l[i + 1])) out.shape_valid = false;
    parts[i] = out.l[i] - (N - 1 - i);
    if (parts[i] < 0) out.shape_valid = false;
  }
  if (out.shape_valid) out.shape = YoungShape(parts);
  if (require_shape && !out.shape_valid)
    throw NotInL("quantile discretization has no strictly decreasing rounding: "
                 "nu is outside the unit-density class (or L truncates it)");

  const DiscreteMeasure truncated =
      nu.to_atoms().map([&](double x) { return std::min(x, L); });
  out.bl_dist = bl_distance(DiscreteMeasure::uniform_atoms(asc), truncated);
  return out;
}

// ------------------------------------------------- constrained minimization

double KKTReport::max_residual() const {
  return std::max(residual_interior, std::max(residual_lower, residual_upper));
}

namespace {

// The quadratic-envelope objective data on a fixed grid.
struct Objective {
  int n = 0;
  double dx = 0.0;
  double ub = 0.0;  // per-cell mass bound cap * dx
  Eigen::MatrixXd lambda;  // log-kernel matrix, self-cells log dx - 3/2
  Eigen::VectorXd c_eff;   // c(m_k) - (a d_A + b d_B) m_k
  Eigen::VectorXd fvals;   // bounded f at midpoints
  double kappa = 0.0, f0 = 0.0, w1 = 0.0, w2 = 0.0;

  double value(const Eigen::VectorXd& w, Eigen::VectorXd& lw) const {
    lw.noalias() = lambda * w;
    const double mf = fvals.dot(w);
    return c_eff.dot(w) - kappa * w.dot(lw) - (f0 + w1 * mf + w2 * mf * mf);
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& w, const Eigen::VectorXd& lw) const {
    const double mf = fvals.dot(w);
    return c_eff - 2.0 * kappa * lw - (w1 + 2.0 * w2 * mf) * fvals;
  }
};

Objective make_objective(const EnsembleSpec& ens, double x0, double dx, int n, double cap) {
  Objective obj;
  obj.n = n;
  obj.dx = dx;
  obj.ub = cap * dx;
  obj.kappa = ens.kappa();
  obj.f0 = ens.F.f0;
  obj.w1 = ens.F.w1;
  obj.w2 = ens.F.w2;

  obj.lambda.resize(n, n);
  const double self = std::log(dx) - 1.5;
  const double inv_dx2 = 1.0 / (dx * dx);
  std::vector<double> pair_k(n, 0.0);  // exact pair integral / dx^2, as in log_energy
  for (int k = 1; k < n; ++k) pair_k[k] = cell_pair_log(k, dx) * inv_dx2;
  for (int i = 0; i < n; ++i) {
    obj.lambda(i, i) = self;
    for (int j = i + 1; j < n; ++j) obj.lambda(i, j) = obj.lambda(j, i) = pair_k[j - i];
  }

  auto log_mean = [](const DiscreteMeasure& mu) {
    return mu.map([](double x) { return std::log(x); }).moment(1);
  };
  const double drift = ens.a * log_mean(ens.mu_A) + ens.b * log_mean(ens.mu_B);
  obj.c_eff.resize(n);
  obj.fvals.resize(n);
  for (int k = 0; k < n; ++k) {
    const double m = x0 + (k + 0.5) * dx;
    obj.c_eff(k) = ens.c.eval(m) - drift * m;
    obj.fvals(k) = ens.F.f.eval(m);
  }
  return obj;
}

// Exact projection onto {0 <= w <= ub, sum w = 1} by bisection on the shift.
Eigen::VectorXd project_capped(const Eigen::VectorXd& v, double ub) {
  const int n = static_cast<int>(v.size());
  auto mass = [&](double tau) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += std::clamp(v(k) - tau, 0.0, ub);
    return s;
  };
  double lo = v.minCoeff() - ub - 1.0, hi = v.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) >= 1.0 ? lo : hi) = mid;
  }
  Eigen::VectorXd w(n);
  for (int k = 0; k < n; ++k) w(k) = std::clamp(v(k) - lo, 0.0, ub);
  const double s = w.sum();
  if (s > 0.0) w *= 1.0 / s;
  for (int k = 0; k < n; ++k) w(k) = std::min(w(k), ub);
  return w;
}

KKTReport kkt_from_gradient(const Eigen::VectorXd& w, const Eigen::VectorXd& g, double ub) {
  const int n = static_cast<int>(w.size());
  const double tol_w = 1e-9 * ub;
  KKTReport rep;
  rep.effective_potential.assign(g.data(), g.data() + n);

  double interior_sum = 0.0;
  int interior_count = 0;
  double cap_max = -std::numeric_limits<double>::infinity();
  double zero_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    if (w(k) <= tol_w)
      zero_min = std::min(zero_min, g(k));
    else if (w(k) >= ub - tol_w)
      cap_max = std::max(cap_max, g(k));
    else {
      interior_sum += g(k);
      ++interior_count;
    }
  }
  if (interior_count > 0) {
    rep.lagrange_const = interior_sum / interior_count;
  } else if (std::isfinite(cap_max) && std::isfinite(zero_min)) {
    rep.lagrange_const = 0.5 * (cap_max + zero_min);
  } else if (std::isfinite(cap_max)) {
    rep.lagrange_const = cap_max;
  } else {
    rep.lagrange_const = zero_min;
  }

  for (int k = 0; k < n; ++k) {
    if (w(k) <= tol_w)
      rep.residual_lower = std::max(rep.residual_lower, rep.lagrange_const - g(k));
    else if (w(k) >= ub - tol_w)
      rep.residual_upper = std::max(rep.residual_upper, g(k) - rep.lagrange_const);
    else
      rep.residual_interior = std::max(rep.residual_interior, std::abs(g(k) - rep.lagrange_const));
  }
  return rep;
}

}  // namespace

MinimizeResult minimize_over_L(const EnsembleSpec& ens, const GridSpec& grid, int max_iter,
                               double kkt_tol) {
  if (grid.cells <= 1 || !(grid.x_max > 0.0) || !(grid.cap > 0.0))
    throw UsageError("minimize_over_L needs cells > 1, x_max > 0, cap > 0");
  if (grid.cap > 1.0 + 1e-12)
    throw UsageError("the constrained class caps densities at 1; cap > 1 is outside it");
  const int n = grid.cells;
  const double dx = grid.x_max / n;
  if (n * grid.cap * dx < 1.0 - 1e-12)
    throw UsageError("grid cannot hold unit mass under the density cap");

  const Objective obj = make_objective(ens, 0.0, dx, n, grid.cap);

  // Initial iterate: density-cap block centered on the c_eff-minimizing cell
  // (first minimum, i.e. ties broken toward smaller x), trimmed by projection.
  int kmin = 0;
  for (int k = 1; k < n; ++k)
    if (obj.c_eff(k) < obj.c_eff(kmin)) kmin = k;
  const double half_width = 0.5 / grid.cap;
  const double center = (kmin + 0.5) * dx;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k)
    if (std::abs((k + 0.5) * dx - center) <= half_width + dx) v(k) = obj.ub;
  Eigen::VectorXd w = project_capped(v, obj.ub);

  Eigen::VectorXd lw(n);
  double fcur = obj.value(w, lw);
  Eigen::VectorXd g = obj.gradient(w, lw);

  std::vector<double> history{fcur};
  KKTReport kkt;
  bool converged = false;
  double alpha = 1.0 / (g.lpNorm<Eigen::Infinity>() + 1.0);
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    kkt = kkt_from_gradient(w, g, obj.ub);
    if (kkt.max_residual() <= kkt_tol) {
      converged = true;
      break;
    }

    // Armijo backtracking along the projection arc (monotone by construction).
    Eigen::VectorXd w_new, lw_new;
    double f_new = fcur;
    bool moved = false;
    for (double a = alpha; a >= 1e-16; a *= 0.5) {
      w_new = project_capped(w - a * g, obj.ub);
      f_new = obj.value(w_new, lw_new);
      const double decrease = g.dot(w - w_new);
      if (f_new <= fcur - 1e-4 * decrease && f_new <= fcur) {
        moved = (w_new - w).lpNorm<Eigen::Infinity>() > 0.0;
        break;
      }
    }
    if (!moved) break;  // stalled: report the last certified residual

    // Barzilai-Borwein step seed for the next iterate.
    const Eigen::VectorXd g_new = obj.gradient(w_new, lw_new);
    const Eigen::VectorXd dw = w_new - w;
    const Eigen::VectorXd dg = g_new - g;
    const double dwdg = dw.dot(dg);
    if (dwdg > 0.0) alpha = std::clamp(dw.squaredNorm() / dwdg, 1e-12, 1e12);

    w = std::move(w_new);
    g = g_new;
    fcur = f_new;
    history.push_back(fcur);
  }
  if (kkt.effective_potential.empty()) kkt = kkt_from_gradient(w, g, obj.ub);

  std::vector<double> rho(n);
  for (int k = 0; k < n; ++k) rho[k] = w(k) / dx;
  GridMeasure minimizer(0.0, dx, rho);

  double edge_mass = 0.0;
  for (int k = std::max(0, n - 2); k < n; ++k) edge_mass += w(k);
  if (edge_mass > 1e-6)
    throw GridTooSmall("minimizer holds mass " + std::to_string(edge_mass) +
                       " in the top two cells: enlarge x_max");

  RateReport value = rate_H(minimizer, ens, {4, 8});
  return MinimizeResult{std::move(minimizer), std::move(kkt), std::move(value),
                        fcur,                 iter,           converged,
                        std::move(history)};
}

KKTReport kkt_residual(const GridMeasure& nu, const EnsembleSpec& ens, double cap) {
  const int n = nu.cells();
  const Objective obj = make_objective(ens, nu.x0(), nu.dx(), n, cap);
  Eigen::VectorXd w(n);
  for (int k = 0; k < n; ++k) w(k) = nu.rho(k) * nu.dx();
  Eigen::VectorXd lw(n);
  obj.value(w, lw);
  return kkt_from_gradient(w, obj.gradient(w, lw), obj.ub);
}

double suggested_xmax(const EnsembleSpec& ens, double margin) {
  // Level of the initial block [0, 1/cap] (cap = 1 here), evaluated exactly:
  // Sigma(U[0, W]) = log W - 3/2.
  const int q = 256;
  double int_c = 0.0, m_f = 0.0, m1 = 0.0;
  for (int k = 0; k < q; ++k) {
    const double x = (k + 0.5) / q;
    int_c += ens.c.eval(x) / q;
    m_f += ens.F.f.eval(x) / q;
    m1 += x / q;
  }
  auto log_mean = [](const DiscreteMeasure& mu) {
    return mu.map([](double x) { return std::log(x); }).moment(1);
  };
  const double drift = ens.a * log_mean(ens.mu_A) + ens.b * log_mean(ens.mu_B);
  const double level = int_c - drift * m1 - ens.kappa() * (std::log(1.0) - 1.5) -
                       (ens.F.f0 + ens.F.w1 * m_f + ens.F.w2 * m_f * m_f);
  const GrowthBound gb = g_lower_bound(ens);
  const double rho = ens.c.growth_rho();
  const double c_prime = gb.offset - ens.F.certified_sup();
  const double bound = (2.0 / rho) * std::max(1.0, level - c_prime);
  return std::max(2.0, bound) + margin;
}

}  // namespace charex
