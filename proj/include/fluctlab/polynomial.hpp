#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fluctlab/model.hpp"

namespace fluctlab {

// A monomial over lattice sites: sorted (site, exponent) pairs, exponents >= 1.
using Monomial = std::vector<std::pair<int, int>>;

// Smooth local function represented as a sparse polynomial in finitely many
// site variables. Supports exact differentiation, translation and the
// plane-rotation derivative used throughout the model.
class LocalFunction {
 public:
  LocalFunction() = default;

  static LocalFunction constant(double c);
  static LocalFunction site(int i, int power = 1);
  static LocalFunction monomial(Monomial m, double coeff);

  LocalFunction& operator+=(const LocalFunction& o);
  LocalFunction& operator-=(const LocalFunction& o);
  LocalFunction& operator*=(double c);
  friend LocalFunction operator+(LocalFunction a, const LocalFunction& b) { return a += b; }
  friend LocalFunction operator-(LocalFunction a, const LocalFunction& b) { return a -= b; }
  friend LocalFunction operator*(LocalFunction a, double c) { return a *= c; }
  friend LocalFunction operator*(double c, LocalFunction a) { return a *= c; }
  friend LocalFunction operator*(const LocalFunction& a, const LocalFunction& b);

  // d/dp_i.
  LocalFunction derivative(int site) const;

  // Lattice shift: (tau^j f)(p) = f(tau^j p) with (tau^j p)_i = p_{i+j},
  // so the monomial site indices move by +j.
  LocalFunction translated(int shift) const;

  // Rotation derivative in the (i,j) plane: p_j d_i - p_i d_j.
  LocalFunction angular_derivative(int i, int j) const;

  double eval(const SiteView& p) const;

  bool empty() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  int degree() const;
  int lo_site() const;  // 0 when constant
  int hi_site() const;
  double max_abs_coeff() const;
  bool is_zero(double tol = 0.0) const { return max_abs_coeff() <= tol; }

  // Drop terms with |coeff| <= tol (absolute).
  LocalFunction& prune(double tol = 0.0);

  const std::map<Monomial, double>& terms() const { return terms_; }
  std::string to_string() const;

  bool same_terms(const LocalFunction& o, double tol) const;

 private:
  std::map<Monomial, double> terms_;
};

}  // namespace fluctlab
