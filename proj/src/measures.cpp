#include "charex/measures.hpp"

#include <algorithm>
#include <cmath>

namespace charex {

GridMeasure::GridMeasure(double x0, double dx, std::vector<double> density)
    : x0_(x0), dx_(dx), rho_(std::move(density)) {
  if (rho_.empty()) throw EmptyInput("grid measure needs at least one cell");
  if (!(dx_ > 0.0)) throw InvalidMeasure("grid spacing must be positive");
  double m = 0.0;
  for (double r : rho_) {
    if (!(r >= -1e-14) || !std::isfinite(r)) throw InvalidMeasure("density must be nonnegative");
    m += r * dx_;
  }
  if (std::abs(m - 1.0) > 1e-10)
    throw InvalidMeasure("grid measure mass " + std::to_string(m) + ", expected 1");
}

GridMeasure GridMeasure::uniform(double a, double b, int cells) {
  if (!(b > a) || cells <= 0) throw InvalidMeasure("uniform measure needs b > a, cells > 0");
  double dx = (b - a) / cells;
  return GridMeasure(a, dx, std::vector<double>(cells, 1.0 / (b - a)));
}

GridMeasure GridMeasure::from_density(double x0, double dx, int cells,
                                      const std::function<double(double)>& f) {
  std::vector<double> rho(cells);
  double m = 0.0;
  for (int k = 0; k < cells; ++k) {
    rho[k] = std::max(0.0, f(x0 + dx * (k + 0.5)));
    m += rho[k] * dx;
  }
  if (m <= 0.0) throw InvalidMeasure("density integrates to zero");
  for (double& r : rho) r /= m;
  return GridMeasure(x0, dx, std::move(rho));
}

double GridMeasure::mass() const {
  double m = 0.0;
  for (double r : rho_) m += r * dx_;
  return m;
}

bool GridMeasure::in_density_class(double cap, double tol) const {
  for (double r : rho_)
    if (r > cap + tol) return false;
  return true;
}

double GridMeasure::integrate(const std::function<double(double)>& f) const {
  double s = 0.0;
  for (int k = 0; k < cells(); ++k) s += f(mid(k)) * rho_[k] * dx_;
  return s;
}

double GridMeasure::moment(int p) const {
  return integrate([p](double x) { return std::pow(x, p); });
}

double GridMeasure::mean_above(double L) const {
  double s = 0.0;
  for (int k = 0; k < cells(); ++k) {
    double lo = x0_ + k * dx_, hi = lo + dx_;
    if (hi <= L) continue;
    double a = std::max(lo, L);
    // integral of (x - L) over [a, hi] with constant density
    s += rho_[k] * 0.5 * ((hi - L) * (hi - L) - (a - L) * (a - L));
  }
  return s;
}

double GridMeasure::cdf(double x) const {
  if (x <= x0_) return 0.0;
  double acc = 0.0;
  for (int k = 0; k < cells(); ++k) {
    double lo = x0_ + k * dx_, hi = lo + dx_;
    if (x >= hi) {
      acc += rho_[k] * dx_;
    } else {
      acc += rho_[k] * (x - lo);
      break;
    }
  }
  return acc;
}

double GridMeasure::quantile(double t) const {
  if (t <= 0.0) return x0_;
  double acc = 0.0;
  for (int k = 0; k < cells(); ++k) {
    double cell = rho_[k] * dx_;
    if (acc + cell >= t) {
      if (cell <= 0.0) return x0_ + (k + 1) * dx_;
      return x0_ + k * dx_ + (t - acc) / rho_[k];
    }
    acc += cell;
  }
  return xmax();
}

DiscreteMeasure GridMeasure::to_atoms() const {
  std::vector<double> pos(cells()), w(cells());
  double m = mass();
  for (int k = 0; k < cells(); ++k) {
    pos[k] = mid(k);
    w[k] = rho_[k] * dx_ / m;
  }
  return DiscreteMeasure(std::move(pos), std::move(w));
}

std::vector<double> nested_quantiles(const GridMeasure& nu, int N, double L) {
  if (N <= 0) throw EmptyInput("nested_quantiles needs N >= 1");
  // capped cdf: F_L(x) = cdf(x) for x < L, and all remaining mass sits at L
  auto cdf_L = [&](double x) { return x >= L ? 1.0 : nu.cdf(x); };
  // inf{x >= from : F_L(x) - F_L(from) >= 1/N} via bisection on the
  // piecewise-linear cdf (monotone; resolution below grid scale)
  const double target = 1.0 / static_cast<double>(N);
  const double tol = 1e-13;
  std::vector<double> pts;
  double from = 0.0, base = 0.0;
  bool overflowed = false;
  for (int i = 0; i < N; ++i) {
    if (overflowed || from >= L) {
      pts.push_back(L + 1.0 / static_cast<double>(N));
      overflowed = true;
      continue;
    }
    double hi = std::max(L, nu.xmax());
    if (cdf_L(hi) - base < target - tol) {
      // remaining mass short of 1/N: the cap atom at L absorbs it
      pts.push_back(L);
      from = L;
      base = 1.0;
      continue;
    }
    double lo = from;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (cdf_L(mid) - base >= target - tol)
        hi = mid;
      else
        lo = mid;
    }
    from = hi;
    base = cdf_L(hi);
    pts.push_back(hi);
  }
  return pts;  // already ascending (a_{N,N} emitted first)
}

std::vector<double> paper_quantiles(const DiscreteMeasure& mu, int N) {
  if (N <= 0) throw EmptyInput("paper_quantiles needs N >= 1");
  std::vector<double> out(N);
  const auto& pos = mu.positions();
  const auto& w = mu.weights();
  for (int i = 1; i <= N; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(N + 1);
    double acc = 0.0;
    double v = pos.back();
    for (std::size_t k = 0; k < pos.size(); ++k) {
      acc += w[k];
      if (acc >= t - 1e-14) {
        v = pos[k];
        break;
      }
    }
    out[i - 1] = v;
  }
  return out;
}

}  // namespace charex
