#pragma once
#include <functional>
#include <vector>

#include "charex/tableaux.hpp"

namespace charex {

// Absolutely continuous probability measure with piecewise-constant density
// on a uniform grid of cells [x0 + k dx, x0 + (k+1) dx).
class GridMeasure {
public:
  GridMeasure(double x0, double dx, std::vector<double> density);
  static GridMeasure uniform(double a, double b, int cells);
  static GridMeasure from_density(double x0, double dx, int cells,
                                  const std::function<double(double)>& f);  // normalized

  double x0() const { return x0_; }
  double dx() const { return dx_; }
  int cells() const { return static_cast<int>(rho_.size()); }
  double xmax() const { return x0_ + dx_ * cells(); }
  double mid(int k) const { return x0_ + dx_ * (k + 0.5); }
  double rho(int k) const { return rho_[k]; }
  const std::vector<double>& density() const { return rho_; }

  double mass() const;  // == 1 within 1e-10 (validated at construction)
  // density cap check for membership in the constrained class
  bool in_density_class(double cap = 1.0, double tol = 1e-9) const;
  double integrate(const std::function<double(double)>& f) const;  // midpoint rule
  double moment(int p) const;
  double mean_above(double L) const;  // int_{x > L} (x - L) dmu (cap excess)

  // cumulative mass of [x0, x] (piecewise linear)
  double cdf(double x) const;
  double quantile(double t) const;  // inf{x : cdf(x) >= t}

  DiscreteMeasure to_atoms() const;  // midpoint atoms, same weights

private:
  double x0_, dx_;
  std::vector<double> rho_;
};

// The paper's nested-infimum quantile discretization of the capped measure
// phi_L # nu: returns a_1 < a_2 < ... < a_N (ascending).  For nu in the
// unit-density class with support inside [0, L], consecutive points are at
// least 1/N apart.
std::vector<double> nested_quantiles(const GridMeasure& nu, int N, double L);

// Plain quantile discretization at levels i/(N+1), i = 1..N (used for
// spectra; atoms of mass m produce ~ floor(N m) repeated values).
std::vector<double> paper_quantiles(const DiscreteMeasure& mu, int N);

}  // namespace charex
