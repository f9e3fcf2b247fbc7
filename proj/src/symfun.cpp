#include "charex/symfun.hpp"

#include "charex/detail/logdet.hpp"
#include "charex/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#ifdef CHAREX_HAVE_FLOAT128
#include <quadmath.h>
#endif

namespace charex {

namespace {

// All sub-partitions mu <= lambda rowwise (mu_i <= lambda_i), any number of
// rows up to rows(lambda), graded ascending.
void subshapes_rec(const std::vector<std::int64_t>& bound, std::size_t row, std::int64_t maxpart,
                   std::vector<std::int64_t>& cur, std::vector<std::vector<std::int64_t>>& out) {
  out.push_back(cur);  // stop here (remaining rows zero)
  if (row == bound.size()) return;
  for (std::int64_t p = 1; p <= std::min(maxpart, bound[row]); ++p) {
    cur.push_back(p);
    subshapes_rec(bound, row + 1, p, cur, out);
    cur.pop_back();
  }
}

struct ShapeIndex {
  std::map<std::vector<std::int64_t>, int> idx;
  std::vector<std::vector<std::int64_t>> shapes;
  int lookup(const std::vector<std::int64_t>& s) const {
    auto it = idx.find(s);
    return it == idx.end() ? -1 : it->second;
  }
};

ShapeIndex build_index(std::vector<std::vector<std::int64_t>> shapes) {
  ShapeIndex si;
  si.shapes = std::move(shapes);
  for (std::size_t i = 0; i < si.shapes.size(); ++i) si.idx[si.shapes[i]] = static_cast<int>(i);
  return si;
}

// One branching level: next[mu] = sum over horizontal strips nu < mu of
// prev[nu] * x^{|mu| - |nu|}.  Pull-style enumeration of the interlacing
// predecessors nu_i in [mu_{i+1}, mu_i].
void branch_level(const ShapeIndex& si, const std::vector<double>& prev, double x,
                  std::vector<double>& next, std::uint64_t& spent, std::uint64_t budget) {
  next.assign(prev.size(), 0.0);
  std::vector<std::int64_t> nu;
  for (std::size_t t = 0; t < si.shapes.size(); ++t) {
    const auto& mu = si.shapes[t];
    double acc = 0.0;
    // recursively walk nu choices; iterative stack to avoid lambda recursion cost
    struct Frame {
      std::int64_t p;
      std::int64_t lo, hi;
    };
    std::vector<Frame> stack;
    nu.clear();
    std::size_t r = mu.size();
    // boxes removed so far tracked implicitly via |mu| - |nu|
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t row, std::int64_t removed) {
      if (++spent > budget) throw ComplexityGuard("schur branching DP transition budget exceeded");
      if (row == r) {
        std::vector<std::int64_t> key(nu);
        while (!key.empty() && key.back() == 0) key.pop_back();
        int j = si.lookup(key);
        if (j >= 0 && prev[j] != 0.0) acc += prev[j] * std::pow(x, static_cast<double>(removed));
        return;
      }
      std::int64_t lo = (row + 1 < r) ? mu[row + 1] : 0;
      for (std::int64_t p = lo; p <= mu[row]; ++p) {
        nu.push_back(p);
        rec(row + 1, removed + (mu[row] - p));
        nu.pop_back();
      }
    };
    rec(0, 0);
    next[t] = acc;
  }
}

// log|det| and sign of the matrix with entries base[i]^exps[j], columns
// scaled by max_i |base[i]|^exps[j].
void scaled_power_logdet(const std::vector<double>& base, const std::vector<std::int64_t>& exps,
                         Precision mode, int& sign, double& logdet_scaled) {
  const int n = static_cast<int>(base.size());
  double amax = 0.0;
  for (double b : base) amax = std::max(amax, std::abs(b));
#ifdef CHAREX_HAVE_FLOAT128
  if (mode == Precision::extended) {
    std::vector<std::vector<__float128>> A(n, std::vector<__float128>(n));
    for (int i = 0; i < n; ++i) {
      __float128 r = static_cast<__float128>(base[i]) / static_cast<__float128>(amax);
      for (int j = 0; j < n; ++j) A[i][j] = powq(r, static_cast<__float128>(exps[j]));
    }
    logdet_scaled = detail::logdet_lu_quad(A, sign);
    return;
  }
#endif
  std::vector<std::vector<double>> A(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    double r = base[i] / amax;
    for (int j = 0; j < n; ++j) A[i][j] = std::pow(r, static_cast<double>(exps[j]));
  }
  logdet_scaled = detail::logdet_lu_double(A, sign);
}

}  // namespace

double schur_branching(const YoungShape& shape, const std::vector<double>& x,
                       std::uint64_t budget) {
  const int N = static_cast<int>(x.size());
  if (N == 0) throw EmptyInput("schur_branching with empty point vector");
  if (static_cast<int>(shape.rows()) > N) return 0.0;
  std::vector<std::vector<std::int64_t>> shapes;
  std::vector<std::int64_t> cur;
  if (shape.rows() == 0) return 1.0;
  subshapes_rec(shape.parts(), 0, shape.parts()[0], cur, shapes);
  std::sort(shapes.begin(), shapes.end());
  shapes.erase(std::unique(shapes.begin(), shapes.end()), shapes.end());
  ShapeIndex si = build_index(std::move(shapes));
  std::vector<double> prev(si.shapes.size(), 0.0), next;
  prev[si.lookup({})] = 1.0;
  std::uint64_t spent = 0;
  for (int k = 0; k < N; ++k) {
    branch_level(si, prev, x[k], next, spent, budget);
    prev.swap(next);
  }
  return prev[si.lookup(shape.parts())];
}

std::vector<double> schur_branching_all(std::int64_t max_boxes, const std::vector<double>& x,
                                        std::uint64_t budget) {
  const int N = static_cast<int>(x.size());
  if (N == 0) throw EmptyInput("schur_branching_all with empty point vector");
  std::vector<YoungShape> all = enumerate_shapes(max_boxes, N);
  std::vector<std::vector<std::int64_t>> shapes;
  shapes.reserve(all.size());
  for (const auto& s : all) shapes.push_back(s.parts());
  ShapeIndex si = build_index(std::move(shapes));
  std::vector<double> prev(si.shapes.size(), 0.0), next;
  prev[si.lookup({})] = 1.0;
  std::uint64_t spent = 0;
  for (int k = 0; k < N; ++k) {
    branch_level(si, prev, x[k], next, spent, budget);
    prev.swap(next);
  }
  // outputs aligned with enumerate_shapes ordering
  std::vector<double> out(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) out[i] = prev[si.lookup(all[i].parts())];
  return out;
}

double schur_determinant(const YoungShape& shape, const std::vector<double>& x, Precision mode) {
  const int N = static_cast<int>(x.size());
  if (N == 0) throw EmptyInput("schur_determinant with empty point vector");
  if (static_cast<int>(shape.rows()) > N) return 0.0;
  double amax = 0.0, amin_gap = std::numeric_limits<double>::infinity();
  for (double v : x) amax = std::max(amax, std::abs(v));
  if (amax == 0.0) return shape.rows() == 0 ? 1.0 : 0.0;
  std::vector<double> sorted(x);
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i + 1 < N; ++i) amin_gap = std::min(amin_gap, sorted[i + 1] - sorted[i]);
  if (N > 1 && amin_gap < 1e-13 * amax)
    throw DegenerateVandermonde("node spacing " + std::to_string(amin_gap) +
                                " too small for the bialternant determinant");
  LSequence l = l_sequence(shape, N);
  std::vector<std::int64_t> vexp(N);
  for (int j = 0; j < N; ++j) vexp[j] = N - 1 - j;
  int sa = 0, sv = 0;
  double la = 0.0, lv = 0.0;
  scaled_power_logdet(x, l, mode, sa, la);
  scaled_power_logdet(x, vexp, mode, sv, lv);
  if (sv == 0) throw DegenerateVandermonde("vandermonde determinant vanished");
  if (sa == 0) return 0.0;
  // column scales contribute amax^(sum l - sum vexp) = amax^{|lambda|}
  double logmag = la - lv + static_cast<double>(shape.boxes()) * std::log(amax);
  return (sa * sv) * std::exp(logmag);
}

double dim_shape(const YoungShape& shape, int N) {
  LSequence l = l_sequence(shape, N);
  // exact 128-bit product when it fits
  bool ok = true;
  __int128 num = 1;
  for (int j = 1; j < N && ok; ++j)
    for (int i = 0; i < j && ok; ++i) {
      __int128 f = l[i] - l[j];
      if (num > (__int128)1 << 120 || f == 0) { ok = false; break; }
      num *= f;
      if (num > ((__int128)1 << 126)) ok = false;
    }
  if (ok) {
    __int128 den = 1;
    for (int i = 1; i < N; ++i)
      for (int j = 1; j <= i; ++j) den *= j;
    __int128 d = num / den;
    if (d * den == num) return static_cast<double>(d);
  }
  return std::exp(log_dim_shape(shape, N));
}

double log_dim_shape(const YoungShape& shape, int N) {
  LSequence l = l_sequence(shape, N);
  double s = 0.0;
  for (int j = 1; j < N; ++j)
    for (int i = 0; i < j; ++i)
      s += std::log(static_cast<double>(l[i] - l[j]) / static_cast<double>(j - i));
  return s;
}

namespace {
double tail_bound_grid(double m, std::int64_t K, const std::vector<double>& xy_products) {
  // bound(q) = q^{-(K+1)} prod (1 - q p)^{-1} over all pair products p,
  // minimized over a geometric grid of q in (1, 1/m).
  if (m >= 1.0) throw RadiusViolation("max x_i y_j = " + std::to_string(m) + " >= 1");
  if (m <= 0.0) return 0.0;
  const int grid = 32;
  double best = std::numeric_limits<double>::infinity();
  for (int g = 1; g <= grid; ++g) {
    double q = std::pow(1.0 / m, static_cast<double>(g) / (grid + 1));
    if (q <= 1.0) continue;
    double logb = -(static_cast<double>(K) + 1.0) * std::log(q);
    bool feasible = true;
    for (double p : xy_products) {
      double t = 1.0 - q * p;
      if (t <= 0.0) { feasible = false; break; }
      logb -= std::log(t);
    }
    if (feasible) best = std::min(best, std::exp(logb));
  }
  if (!std::isfinite(best)) throw RadiusViolation("tail bound grid found no feasible q");
  return best;
}
}  // namespace

namespace {
std::vector<double> pair_products(const std::vector<double>& x, const std::vector<double>& y,
                                  double factor) {
  std::vector<double> p;
  p.reserve(x.size() * y.size());
  for (double a : x)
    for (double b : y) p.push_back(factor * a * b);
  return p;
}
}  // namespace

CauchySum cauchy_truncated(const std::vector<double>& x, const std::vector<double>& y,
                           std::int64_t K) {
  if (x.empty() || y.empty()) throw EmptyInput("cauchy_truncated needs nonempty x, y");
  for (double v : x)
    if (v < 0.0) throw NonPositiveInput("cauchy_truncated needs x >= 0");
  for (double v : y)
    if (v < 0.0) throw NonPositiveInput("cauchy_truncated needs y >= 0");
  // s_lambda vanishes beyond min(#x, #y) rows.
  const int nrows = static_cast<int>(std::min(x.size(), y.size()));
  std::vector<YoungShape> shapes = enumerate_shapes(K, nrows);
  std::vector<double> sx = schur_branching_all(K, x);
  std::vector<double> sy = schur_branching_all(K, y);
  std::vector<YoungShape> shapes_x = enumerate_shapes(K, static_cast<int>(x.size()));
  std::vector<YoungShape> shapes_y = enumerate_shapes(K, static_cast<int>(y.size()));
  std::map<std::vector<std::int64_t>, double> mx, my;
  for (std::size_t i = 0; i < shapes_x.size(); ++i) mx[shapes_x[i].parts()] = sx[i];
  for (std::size_t i = 0; i < shapes_y.size(); ++i) my[shapes_y[i].parts()] = sy[i];
  std::vector<double> terms(shapes.size());
  for (std::size_t i = 0; i < shapes.size(); ++i)
    terms[i] = mx.at(shapes[i].parts()) * my.at(shapes[i].parts());
  CauchySum out;
  out.partial_sum = par::pairwise_sum(terms);
  out.boxes_used = K;
  auto prods = pair_products(x, y, 1.0);
  double m = 0.0;
  for (double p : prods) m = std::max(m, p);
  if (m >= 1.0) throw RadiusViolation("max x_i y_j = " + std::to_string(m) + " >= 1");
  // record the best grid q alongside the bound
  out.tail_bound = tail_bound_grid(m, K, prods);
  const int grid = 32;
  double best = std::numeric_limits<double>::infinity();
  for (int g = 1; g <= grid && m > 0.0; ++g) {
    double q = std::pow(1.0 / m, static_cast<double>(g) / (grid + 1));
    if (q <= 1.0) continue;
    double logb = -(static_cast<double>(K) + 1.0) * std::log(q);
    bool feasible = true;
    for (double p : prods) {
      double t = 1.0 - q * p;
      if (t <= 0.0) { feasible = false; break; }
      logb -= std::log(t);
    }
    if (feasible && std::exp(logb) < best) {
      best = std::exp(logb);
      out.q_used = q;
    }
  }
  return out;
}

double cauchy_product(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty() || y.empty()) throw EmptyInput("cauchy_product needs nonempty x, y");
  double logp = 0.0;
  for (double a : x)
    for (double b : y) {
      double t = 1.0 - a * b;
      if (t <= 0.0) throw RadiusViolation("cauchy_product needs x_i y_j < 1");
      logp -= std::log(t);
    }
  return std::exp(logp);
}

double cauchy_tail_bound(const std::vector<double>& x, const std::vector<double>& y,
                         std::int64_t K, double extra_radius_factor) {
  auto prods = pair_products(x, y, extra_radius_factor);
  double m = 0.0;
  for (double p : prods) m = std::max(m, p);
  return tail_bound_grid(m, K, prods);
}

}  // namespace charex
