#pragma once
#include <string>
#include <vector>

#include "charex/errors.hpp"

namespace charex {

// Whitelisted closed-form families with analytically certified range bounds.
// (Arbitrary user formulas are rejected: every instance must come with exact
// inf/sup certificates over its domain.)
class BoundedFn {
public:
  enum class Family { constant, rational_even, logistic };

  static BoundedFn constant(double v);
  // (p0 + p1 x^2) / (q0 + q1 x^2) with p0, p1 >= 0, q0, q1 > 0; monotone in
  // x^2, so the exact range is [min, max] of {p0/q0, p1/q1}.
  static BoundedFn rational_even(double p0, double p1, double q0, double q1);
  // c0 + c1 / (1 + exp(-s x)), c1 >= 0: range (c0, c0 + c1) (limits certified).
  static BoundedFn logistic(double c0, double c1, double s);

  // "const:v" | "ratquad:c0,c1" (meaning c0 + c1/(1+x^2)) |
  // "rational:p0,p1,q0,q1" | "logistic:c0,c1,s"
  static BoundedFn parse(const std::string& text);

  double eval(double x) const;
  double inf() const { return inf_; }   // certified over all of R
  double sup() const { return sup_; }
  std::string describe() const;

private:
  Family fam_ = Family::constant;
  double a_ = 0, b_ = 0, c_ = 0, d_ = 0;
  double inf_ = 0, sup_ = 0;
};

// Cut-off function Phi: a BoundedFn with 0 < inf <= sup < 1 enforced
// (paper-side hypotheses; sup is the operator norm bound used for the
// character tail).
class CutoffFunction {
public:
  explicit CutoffFunction(BoundedFn f);
  static CutoffFunction parse(const std::string& text) { return CutoffFunction(BoundedFn::parse(text)); }

  double eval(double x) const { return f_.eval(x); }
  double inf() const { return f_.inf(); }
  double norm() const { return f_.sup(); }          // ||Phi||_infinity
  double rho() const;                               // -log ||Phi||
  std::string describe() const { return f_.describe(); }

private:
  BoundedFn f_;
};

// Polynomial confining potential c(x) on R+ with certified superlinear
// growth: liminf_{x->inf} c(x)/x > 0 (positive leading coefficient; if the
// degree is 1 the slope itself must be positive).
class Potential {
public:
  explicit Potential(std::vector<double> ascending_coeffs);
  static Potential parse(const std::string& text);  // "x^2 - x", "0.5x^3 + 2"
  Potential scaled(double s) const;

  double eval(double x) const;
  double derivative(double x) const;
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  std::string format() const;

  // Certified growth pair: c(x) >= rho * x + C for all x >= 0, with rho > 0.
  // (rho is the slope for degree 1, otherwise 1; C is a safe numeric floor.)
  double growth_rho() const { return rho_; }
  double growth_floor() const { return floor_; }

private:
  std::vector<double> coeffs_;
  double rho_ = 0, floor_ = 0;
};

}  // namespace charex
