#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace fluctlab {

// Bond coupling a(r,s) with analytic partial derivatives and certified bounds
// 0 < c <= a <= C. Two built-in families are provided; arbitrary couplings can
// be constructed from callables (they lose the closed-form moment shortcuts
// but keep every contract).
class Coupling {
 public:
  enum class Kind { constant, gaussian_bump, custom };

  static Coupling constant(double a0) {
    if (a0 <= 0.0) throw std::invalid_argument("coupling: a0 must be positive");
    Coupling c;
    c.kind_ = Kind::constant;
    c.a0_ = a0;
    c.lower_ = a0;
    c.upper_ = a0;
    c.deriv_bound_ = 0.0;
    return c;
  }

  // a(r,s) = 1 + eps * exp(-(r-s)^2/(2 w^2)), eps in (0,1), w > 0. The bump
  // rides on the exchange direction r - s; a bump in r^2 + s^2 is even under
  // every single-site sign flip, which makes the current orthogonal to all
  // low-degree cyclic gradients and leaves the model effectively gradient at
  // measurable scales.
  static Coupling gaussian_bump(double eps, double width) {
    if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("coupling: eps must be in (0,1)");
    if (width <= 0.0) throw std::invalid_argument("coupling: width must be positive");
    Coupling c;
    c.kind_ = Kind::gaussian_bump;
    c.eps_ = eps;
    c.w_ = width;
    c.lower_ = 1.0;
    c.upper_ = 1.0 + eps;
    c.deriv_bound_ = eps / (width * std::sqrt(std::exp(1.0)));
    return c;
  }

  static Coupling custom(std::function<double(double, double)> eval,
                         std::function<double(double, double)> d_r,
                         std::function<double(double, double)> d_s,
                         double lower, double upper, double deriv_bound) {
    if (!(lower > 0.0) || upper < lower) throw std::invalid_argument("coupling: need 0 < c <= C");
    Coupling c;
    c.kind_ = Kind::custom;
    c.eval_ = std::move(eval);
    c.dr_ = std::move(d_r);
    c.ds_ = std::move(d_s);
    c.lower_ = lower;
    c.upper_ = upper;
    c.deriv_bound_ = deriv_bound;
    return c;
  }

  double operator()(double r, double s) const {
    switch (kind_) {
      case Kind::constant: return a0_;
      case Kind::gaussian_bump: {
        const double t = r - s;
        return 1.0 + eps_ * std::exp(-t * t / (2.0 * w_ * w_));
      }
      case Kind::custom: return eval_(r, s);
    }
    return a0_;
  }

  double dr(double r, double s) const {
    switch (kind_) {
      case Kind::constant: return 0.0;
      case Kind::gaussian_bump: {
        const double t = r - s;
        return -eps_ * (t / (w_ * w_)) * std::exp(-t * t / (2.0 * w_ * w_));
      }
      case Kind::custom: return dr_(r, s);
    }
    return 0.0;
  }

  double ds(double r, double s) const {
    switch (kind_) {
      case Kind::constant: return 0.0;
      case Kind::gaussian_bump: {
        const double t = r - s;
        return eps_ * (t / (w_ * w_)) * std::exp(-t * t / (2.0 * w_ * w_));
      }
      case Kind::custom: return ds_(r, s);
    }
    return 0.0;
  }

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::constant; }
  double constant_value() const { return a0_; }
  double bump_eps() const { return eps_; }
  double bump_width() const { return w_; }
  double lower_bound() const { return lower_; }
  double upper_bound() const { return upper_; }
  double derivative_bound() const { return deriv_bound_; }

  std::string describe() const {
    switch (kind_) {
      case Kind::constant: return "constant:" + format(a0_);
      case Kind::gaussian_bump: return "gaussian-bump:" + format(eps_) + ":" + format(w_);
      case Kind::custom: return "custom";
    }
    return "constant:1";
  }

  // Parses "constant:A0" or "gaussian-bump:EPS:W".
  static Coupling parse(const std::string& text);

 private:
  Coupling() = default;
  static std::string format(double v);

  Kind kind_ = Kind::constant;
  double a0_ = 1.0;
  double eps_ = 0.0;
  double w_ = 1.0;
  double lower_ = 1.0;
  double upper_ = 1.0;
  double deriv_bound_ = 0.0;
  std::function<double(double, double)> eval_, dr_, ds_;
};

}  // namespace fluctlab
