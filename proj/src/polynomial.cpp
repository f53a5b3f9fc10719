#include "fluctlab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fluctlab {

namespace {

Monomial multiply_monomials(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      out.push_back(a[i++]);
    } else if (a[i].first > b[j].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  for (; i < a.size(); ++i) out.push_back(a[i]);
  for (; j < b.size(); ++j) out.push_back(b[j]);
  return out;
}

}  // namespace

LocalFunction LocalFunction::constant(double c) {
  LocalFunction f;
  if (c != 0.0) f.terms_[Monomial{}] = c;
  return f;
}

LocalFunction LocalFunction::site(int i, int power) {
  LocalFunction f;
  if (power < 0) throw std::invalid_argument("polynomial: negative power");
  if (power == 0) return constant(1.0);
  f.terms_[Monomial{{i, power}}] = 1.0;
  return f;
}

LocalFunction LocalFunction::monomial(Monomial m, double coeff) {
  std::sort(m.begin(), m.end());
  Monomial clean;
  for (const auto& [site, exp] : m) {
    if (exp < 0) throw std::invalid_argument("polynomial: negative power");
    if (exp == 0) continue;
    if (!clean.empty() && clean.back().first == site) {
      clean.back().second += exp;
    } else {
      clean.emplace_back(site, exp);
    }
  }
  LocalFunction f;
  if (coeff != 0.0) f.terms_[std::move(clean)] = coeff;
  return f;
}

LocalFunction& LocalFunction::operator+=(const LocalFunction& o) {
  for (const auto& [m, c] : o.terms_) {
    auto [it, fresh] = terms_.try_emplace(m, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }
  return *this;
}

LocalFunction& LocalFunction::operator-=(const LocalFunction& o) {
  for (const auto& [m, c] : o.terms_) {
    auto [it, fresh] = terms_.try_emplace(m, -c);
    if (!fresh) {
      it->second -= c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }
  return *this;
}

LocalFunction& LocalFunction::operator*=(double c) {
  if (c == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, v] : terms_) v *= c;
  return *this;
}

LocalFunction operator*(const LocalFunction& a, const LocalFunction& b) {
  LocalFunction out;
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      Monomial m = multiply_monomials(ma, mb);
      auto [it, fresh] = out.terms_.try_emplace(std::move(m), ca * cb);
      if (!fresh) it->second += ca * cb;
    }
  }
  out.prune(0.0);
  return out;
}

LocalFunction LocalFunction::derivative(int site) const {
  LocalFunction out;
  for (const auto& [m, c] : terms_) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (m[k].first != site) continue;
      Monomial d = m;
      const int e = d[k].second;
      if (e == 1) {
        d.erase(d.begin() + static_cast<std::ptrdiff_t>(k));
      } else {
        d[k].second = e - 1;
      }
      auto [it, fresh] = out.terms_.try_emplace(std::move(d), c * e);
      if (!fresh) it->second += c * e;
      break;
    }
  }
  out.prune(0.0);
  return out;
}

LocalFunction LocalFunction::translated(int shift) const {
  LocalFunction out;
  for (const auto& [m, c] : terms_) {
    Monomial t = m;
    for (auto& [site, exp] : t) site += shift;
    out.terms_.emplace(std::move(t), c);
  }
  return out;
}

LocalFunction LocalFunction::angular_derivative(int i, int j) const {
  LocalFunction out = site(j) * derivative(i);
  out -= site(i) * derivative(j);
  return out;
}

double LocalFunction::eval(const SiteView& p) const {
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double v = c;
    for (const auto& [site, exp] : m) {
      const double x = p[site];
      double xp = x;
      for (int e = 1; e < exp; ++e) xp *= x;
      v *= xp;
    }
    sum += v;
  }
  return sum;
}

int LocalFunction::degree() const {
  int deg = 0;
  for (const auto& [m, c] : terms_) {
    (void)c;
    int d = 0;
    for (const auto& [site, exp] : m) {
      (void)site;
      d += exp;
    }
    deg = std::max(deg, d);
  }
  return deg;
}

int LocalFunction::lo_site() const {
  int lo = 0;
  bool seen = false;
  for (const auto& [m, c] : terms_) {
    (void)c;
    if (m.empty()) continue;
    lo = seen ? std::min(lo, m.front().first) : m.front().first;
    seen = true;
  }
  return lo;
}

int LocalFunction::hi_site() const {
  int hi = 0;
  bool seen = false;
  for (const auto& [m, c] : terms_) {
    (void)c;
    if (m.empty()) continue;
    hi = seen ? std::max(hi, m.back().first) : m.back().first;
    seen = true;
  }
  return hi;
}

double LocalFunction::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [mono, c] : terms_) {
    (void)mono;
    m = std::max(m, std::abs(c));
  }
  return m;
}

LocalFunction& LocalFunction::prune(double tol) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) <= tol) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

std::string LocalFunction::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c;
    for (const auto& [site, exp] : m) {
      os << "*p[" << site << "]";
      if (exp > 1) os << "^" << exp;
    }
  }
  return os.str();
}

bool LocalFunction::same_terms(const LocalFunction& o, double tol) const {
  LocalFunction diff = *this;
  diff -= o;
  return diff.max_abs_coeff() <= tol;
}

}  // namespace fluctlab
