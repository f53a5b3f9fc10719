#include "fluctlab/expectation.hpp"

#include <cmath>
#include <stdexcept>

#include "fluctlab/quadrature.hpp"

namespace fluctlab {

double gaussian_moment(int k, double y) {
  if (k < 0) throw std::invalid_argument("gaussian_moment: negative power");
  if (k % 2 == 1) return 0.0;
  double m = 1.0;
  for (int j = 1; j < k; j += 2) m *= static_cast<double>(j);  // (k-1)!!
  return m * std::pow(y, k);
}

double expect_gaussian(const LocalFunction& f, double y) {
  double sum = 0.0;
  for (const auto& [m, c] : f.terms()) {
    double v = c;
    for (const auto& [site, exp] : m) {
      (void)site;
      if (exp % 2 == 1) {
        v = 0.0;
        break;
      }
      v *= gaussian_moment(exp, y);
    }
    sum += v;
  }
  return sum;
}

PairMomentTable::PairMomentTable(const Coupling& a, double y, int max_exp) : max_exp_(max_exp) {
  table_.assign(static_cast<std::size_t>(max_exp + 1) * static_cast<std::size_t>(max_exp + 1), 0.0);
  switch (a.kind()) {
    case Coupling::Kind::constant: {
      const double a0 = a.constant_value();
      for (int i = 0; i <= max_exp; ++i)
        for (int j = 0; j <= max_exp; ++j)
          table_[idx(i, j)] = a0 * gaussian_moment(i, y) * gaussian_moment(j, y);
      break;
    }
    case Coupling::Kind::gaussian_bump: {
      // e^{-(p-q)^2/2w^2} times the product Gaussian is a correlated bivariate
      // Gaussian: precision [[al,-be],[-be,al]] with al = 1/y^2 + 1/w^2,
      // be = 1/w^2. Its moments follow the Stein recursion
      //   M(i,j) = v (i-1) M(i-2,j) + c j M(i-1,j-1),
      // v = al/(al^2-be^2), c = be/(al^2-be^2).
      const double eps = a.bump_eps();
      const double w = a.bump_width();
      const double al = 1.0 / (y * y) + 1.0 / (w * w);
      const double be = 1.0 / (w * w);
      const double det = al * al - be * be;
      const double v = al / det;
      const double c = be / det;
      const double z = 1.0 / (y * y * std::sqrt(det));  // E[e^{-(p-q)^2/2w^2}]
      std::vector<double> M(static_cast<std::size_t>(max_exp + 1) *
                                static_cast<std::size_t>(max_exp + 1),
                            0.0);
      const auto at = [&](int i, int j) -> double {
        if (i < 0 || j < 0) return 0.0;
        return M[idx(i, j)];
      };
      M[idx(0, 0)] = 1.0;
      for (int i = 0; i <= max_exp; ++i) {
        for (int j = 0; j <= max_exp; ++j) {
          if (i + j == 0) continue;
          if (i > 0) {
            M[idx(i, j)] = v * (i - 1) * at(i - 2, j) + c * j * at(i - 1, j - 1);
          } else {
            M[idx(i, j)] = v * (j - 1) * at(i, j - 2);  // symmetric role of q
          }
        }
      }
      for (int i = 0; i <= max_exp; ++i)
        for (int j = 0; j <= max_exp; ++j)
          table_[idx(i, j)] =
              gaussian_moment(i, y) * gaussian_moment(j, y) + eps * z * M[idx(i, j)];
      break;
    }
    case Coupling::Kind::custom: {
      const int order = std::max(32, max_exp + 8);
      const auto& rule = gauss_hermite(order);
      for (std::size_t qi = 0; qi < rule.nodes.size(); ++qi) {
        for (std::size_t qj = 0; qj < rule.nodes.size(); ++qj) {
          const double p0 = y * rule.nodes[qi];
          const double p1 = y * rule.nodes[qj];
          const double wgt = rule.weights[qi] * rule.weights[qj] * a(p0, p1);
          double pow0 = 1.0;
          for (int i = 0; i <= max_exp; ++i) {
            double pow1 = 1.0;
            for (int j = 0; j <= max_exp; ++j) {
              table_[idx(i, j)] += wgt * pow0 * pow1;
              pow1 *= p1;
            }
            pow0 *= p0;
          }
        }
      }
      break;
    }
  }
}

double expect_gaussian_weighted(const LocalFunction& f, double y, const PairMomentTable& table) {
  double sum = 0.0;
  for (const auto& [m, c] : f.terms()) {
    double v = c;
    int e0 = 0, e1 = 0;
    for (const auto& [site, exp] : m) {
      if (site == 0) {
        e0 = exp;
      } else if (site == 1) {
        e1 = exp;
      } else if (exp % 2 == 1) {
        v = 0.0;
        break;
      } else {
        v *= gaussian_moment(exp, y);
      }
    }
    if (v != 0.0) sum += v * table(e0, e1);
  }
  return sum;
}

double expect_gaussian_weighted(const LocalFunction& f, double y, const Coupling& a) {
  if (a.is_constant()) return a.constant_value() * expect_gaussian(f, y);
  PairMomentTable table(a, y, f.degree());
  return expect_gaussian_weighted(f, y, table);
}

double sphere_even_moment(const std::vector<int>& half_exponents, int ambient_dim, double radius) {
  if (ambient_dim < 1) throw std::invalid_argument("sphere moment: dimension must be >= 1");
  static const double lgamma_half = std::lgamma(0.5);
  int a = 0;
  double lg = 0.0;
  for (int ak : half_exponents) {
    if (ak < 0) throw std::invalid_argument("sphere moment: negative exponent");
    a += ak;
    lg += std::lgamma(ak + 0.5) - lgamma_half;
  }
  lg += std::lgamma(0.5 * ambient_dim) - std::lgamma(a + 0.5 * ambient_dim);
  lg += 2.0 * a * std::log(radius);
  const double v = std::exp(lg);
  if (!std::isfinite(v)) throw std::runtime_error("sphere moment: non-finite result");
  return v;
}

double expect_sphere(const LocalFunction& f, int ambient_dim, double radius, int coord_lo) {
  double sum = 0.0;
  for (const auto& [m, c] : f.terms()) {
    bool odd = false;
    std::vector<int> half;
    half.reserve(m.size());
    for (const auto& [site, exp] : m) {
      if (site < coord_lo || site >= coord_lo + ambient_dim)
        throw std::invalid_argument("expect_sphere: monomial site outside coordinate range");
      if (exp % 2 == 1) {
        odd = true;
        break;
      }
      half.push_back(exp / 2);
    }
    if (odd) continue;
    sum += c * sphere_even_moment(half, ambient_dim, radius);
  }
  return sum;
}

}  // namespace fluctlab
