#include "charex/functions.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace charex {

namespace {
std::vector<double> split_params(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str()) throw UsageError("cannot parse parameter '" + tok + "'");
    out.push_back(v);
  }
  return out;
}
}  // namespace

BoundedFn BoundedFn::constant(double v) {
  BoundedFn f;
  f.fam_ = Family::constant;
  f.a_ = v;
  f.inf_ = f.sup_ = v;
  return f;
}

BoundedFn BoundedFn::rational_even(double p0, double p1, double q0, double q1) {
  if (p0 < 0 || p1 < 0 || q0 <= 0 || q1 <= 0)
    throw UsageError("rational_even needs p >= 0 and q > 0 coefficients");
  BoundedFn f;
  f.fam_ = Family::rational_even;
  f.a_ = p0;
  f.b_ = p1;
  f.c_ = q0;
  f.d_ = q1;
  f.inf_ = std::min(p0 / q0, p1 / q1);
  f.sup_ = std::max(p0 / q0, p1 / q1);
  return f;
}

BoundedFn BoundedFn::logistic(double c0, double c1, double s) {
  if (c1 < 0) throw UsageError("logistic needs c1 >= 0");
  BoundedFn f;
  f.fam_ = Family::logistic;
  f.a_ = c0;
  f.b_ = c1;
  f.c_ = s;
  f.inf_ = std::min(c0, c0 + c1);
  f.sup_ = std::max(c0, c0 + c1);
  return f;
}

BoundedFn BoundedFn::parse(const std::string& text) {
  auto pos = text.find(':');
  if (pos == std::string::npos) throw UsageError("bounded function spec needs 'family:params'");
  std::string fam = text.substr(0, pos);
  auto p = split_params(text.substr(pos + 1));
  if (fam == "const" && p.size() == 1) return constant(p[0]);
  if (fam == "ratquad" && p.size() == 2)
    return rational_even(p[0] + p[1], p[0], 1.0, 1.0);  // c0 + c1/(1+x^2)
  if (fam == "rational" && p.size() == 4) return rational_even(p[0], p[1], p[2], p[3]);
  if (fam == "logistic" && p.size() == 3) return logistic(p[0], p[1], p[2]);
  throw UsageError("unknown bounded function spec '" + text + "'");
}

double BoundedFn::eval(double x) const {
  switch (fam_) {
    case Family::constant:
      return a_;
    case Family::rational_even: {
      double u = x * x;
      return (a_ + b_ * u) / (c_ + d_ * u);
    }
    case Family::logistic:
      return a_ + b_ / (1.0 + std::exp(-c_ * x));
  }
  return a_;
}

std::string BoundedFn::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (fam_) {
    case Family::constant:
      os << "const:" << a_;
      break;
    case Family::rational_even:
      os << "rational:" << a_ << "," << b_ << "," << c_ << "," << d_;
      break;
    case Family::logistic:
      os << "logistic:" << a_ << "," << b_ << "," << c_;
      break;
  }
  return os.str();
}

CutoffFunction::CutoffFunction(BoundedFn f) : f_(f) {
  if (!(f_.inf() > 0.0))
    throw HypothesisViolation("cutoff function must be bounded below by a positive constant");
  if (!(f_.sup() < 1.0))
    throw HypothesisViolation("cutoff function must satisfy sup Phi < 1");
}

double CutoffFunction::rho() const { return -std::log(f_.sup()); }

Potential::Potential(std::vector<double> ascending_coeffs) : coeffs_(std::move(ascending_coeffs)) {
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
  if (coeffs_.size() < 2)
    throw HypothesisViolation("potential must have degree >= 1 for superlinear growth");
  if (coeffs_.back() <= 0.0)
    throw HypothesisViolation("potential needs a positive leading coefficient");
  if (coeffs_.size() == 2 && coeffs_[1] <= 0.0)
    throw HypothesisViolation("degree-1 potential needs positive slope");
  rho_ = (degree() == 1) ? coeffs_[1] : 1.0;
  // Certified floor for c(x) - rho x on [0, inf): beyond the Cauchy root bound
  // of its derivative the difference is increasing, so a dense scan of the
  // bounded region (with a safety margin) gives a valid lower constant.
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = coeffs_[k] * static_cast<double>(k);
  d[0] -= rho_;
  double xmax = 1.0;
  for (std::size_t k = 0; k + 1 < d.size(); ++k)
    xmax = std::max(xmax, 1.0 + std::abs(d[k] / d.back()));
  double best = eval(0.0);
  const int n = 200000;
  for (int i = 0; i <= n; ++i) {
    double x = xmax * static_cast<double>(i) / n;
    best = std::min(best, eval(x) - rho_ * x);
  }
  floor_ = best - 1e-9 * (1.0 + std::abs(best));
}

double Potential::eval(double x) const {
  double v = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 0;) v = v * x + coeffs_[k];
  return v;
}

double Potential::derivative(double x) const {
  double v = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 1;) v = v * x + coeffs_[k] * static_cast<double>(k);
  return v;
}

Potential Potential::scaled(double s) const {
  std::vector<double> c(coeffs_);
  for (double& v : c) v *= s;
  return Potential(std::move(c));
}

Potential Potential::parse(const std::string& text) {
  // terms: [+-] [coef] [x [^k]]   e.g. "x^2 - x", "0.5x^3+2x", "3"
  std::vector<double> coeffs;
  auto bump = [&](std::size_t k, double v) {
    if (coeffs.size() <= k) coeffs.resize(k + 1, 0.0);
    coeffs[k] += v;
  };
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) throw UsageError("empty potential spec");
  std::size_t i = 0;
  while (i < s.size()) {
    double sign = 1.0;
    while (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      if (s[i] == '-') sign = -sign;
      ++i;
    }
    if (i >= s.size()) throw UsageError("dangling sign in potential '" + text + "'");
    double coef = 1.0;
    bool have_coef = false;
    if (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.') {
      char* end = nullptr;
      coef = std::strtod(s.c_str() + i, &end);
      i = static_cast<std::size_t>(end - s.c_str());
      have_coef = true;
    }
    std::size_t power = 0;
    if (i < s.size() && (s[i] == 'x' || s[i] == 'X')) {
      ++i;
      power = 1;
      if (i < s.size() && s[i] == '^') {
        ++i;
        char* end = nullptr;
        long p = std::strtol(s.c_str() + i, &end, 10);
        if (end == s.c_str() + i || p < 0) throw UsageError("bad exponent in potential");
        power = static_cast<std::size_t>(p);
        i = static_cast<std::size_t>(end - s.c_str());
      }
    } else if (!have_coef) {
      throw UsageError("cannot parse potential term in '" + text + "'");
    }
    bump(power, sign * coef);
  }
  return Potential(std::move(coeffs));
}

std::string Potential::format() const {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (std::size_t k = coeffs_.size(); k-- > 0;) {
    if (coeffs_[k] == 0.0) continue;
    double v = coeffs_[k];
    if (!first) os << (v >= 0 ? " + " : " - ");
    else if (v < 0) os << "-";
    first = false;
    double a = std::abs(v);
    if (k == 0 || a != 1.0) os << a;
    if (k >= 1) os << "x";
    if (k >= 2) os << "^" << k;
  }
  if (first) os << "0";
  return os.str();
}

}  // namespace charex
