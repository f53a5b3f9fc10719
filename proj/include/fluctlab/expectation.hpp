#pragma once

#include "fluctlab/coupling.hpp"
#include "fluctlab/polynomial.hpp"

namespace fluctlab {

// E[Z^k] for Z ~ N(0, y^2): zero for odd k, y^k (k-1)!! for even k.
double gaussian_moment(int k, double y);

// Exact expectation of a polynomial under the i.i.d. N(0,y^2) product measure.
double expect_gaussian(const LocalFunction& f, double y);

// Exact E[ a(p_0, p_1) f(p) ] under the product measure. The coupling touches
// only sites 0 and 1, so every monomial factorizes into a weighted pair moment
// times plain Gaussian moments. Built-in couplings have closed-form pair
// moments; custom couplings fall back to a 2-d quadrature table.
double expect_gaussian_weighted(const LocalFunction& f, double y, const Coupling& a);

class PairMomentTable;
double expect_gaussian_weighted(const LocalFunction& f, double y, const PairMomentTable& table);

// Table of E[ a(p_0,p_1) p_0^i p_1^j ] for 0 <= i,j <= max_exp.
class PairMomentTable {
 public:
  PairMomentTable(const Coupling& a, double y, int max_exp);
  double operator()(int e0, int e1) const { return table_[idx(e0, e1)]; }
  int max_exp() const { return max_exp_; }

 private:
  std::size_t idx(int e0, int e1) const {
    return static_cast<std::size_t>(e0) * static_cast<std::size_t>(max_exp_ + 1) +
           static_cast<std::size_t>(e1);
  }
  int max_exp_;
  std::vector<double> table_;
};

// Exact expectation of an even polynomial monomial sum under the uniform
// measure on the sphere |p| = radius in R^ambient_dim. Monomial sites must lie
// in [coord_lo, coord_lo + ambient_dim). Odd-exponent monomials vanish.
double expect_sphere(const LocalFunction& f, int ambient_dim, double radius, int coord_lo = 0);

// Normalized sphere expectation of a single monomial prod (p_k^2)^{a_k}.
double sphere_even_moment(const std::vector<int>& half_exponents, int ambient_dim, double radius);

}  // namespace fluctlab
