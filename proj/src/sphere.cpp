#include "fluctlab/sphere.hpp"

#include <cmath>

#include "fluctlab/quadrature.hpp"
#include "fluctlab/stats.hpp"

namespace fluctlab {

void sample_sphere_into(std::vector<double>& out, const SphereSpec& spec, Rng& rng) {
  const auto n = static_cast<std::size_t>(spec.dimension);
  out.resize(n);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& v : out) {
      v = rng.normal();
      norm2 += v * v;
    }
  } while (norm2 == 0.0);
  const double scale = spec.radius / std::sqrt(norm2);
  for (auto& v : out) v *= scale;
}

std::vector<double> sample_sphere(const SphereSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<double> out;
  sample_sphere_into(out, spec, rng);
  return out;
}

SphereMoment moment_closed_form(const std::vector<int>& exponents, const SphereSpec& spec) {
  spec.validate();
  const int n = spec.dimension;
  if (static_cast<int>(exponents.size()) > n)
    throw std::invalid_argument("moment_closed_form: more exponents than dimensions");
  int a = 0;
  double lg = std::log(2.0);
  for (int ak : exponents) {
    if (ak < 0) throw std::invalid_argument("moment_closed_form: negative exponent");
    a += ak;
    lg += std::lgamma(ak + 0.5);
  }
  lg += (n - static_cast<int>(exponents.size())) * std::lgamma(0.5);
  lg -= std::lgamma(a + 0.5 * n);
  lg += (2.0 * a + n - 1.0) * std::log(spec.radius);
  SphereMoment m;
  m.surface_integral = std::exp(lg);
  std::vector<int> half(exponents);
  m.normalized_expectation = sphere_even_moment(half, n, spec.radius);
  if (!std::isfinite(m.surface_integral) || !std::isfinite(m.normalized_expectation))
    throw std::runtime_error("moment_closed_form: non-finite result");
  return m;
}

double sphere_surface_area(const SphereSpec& spec) {
  const double lg = std::log(2.0) + 0.5 * spec.dimension * std::log(M_PI) -
                    std::lgamma(0.5 * spec.dimension) + (spec.dimension - 1.0) * std::log(spec.radius);
  return std::exp(lg);
}

double ball_volume(const SphereSpec& spec) {
  const double lg = 0.5 * spec.dimension * std::log(M_PI) -
                    std::lgamma(0.5 * spec.dimension + 1.0) + spec.dimension * std::log(spec.radius);
  return std::exp(lg);
}

CheckResult divergence_check(const Observable& f, int coord, const SphereSpec& spec, int samples,
                             Rng& rng) {
  spec.validate();
  if (samples < 2) throw std::invalid_argument("divergence_check: need at least 2 samples");
  const double vol = ball_volume(spec);
  const double area = sphere_surface_area(spec);
  const double inv_n = 1.0 / static_cast<double>(spec.dimension);

  RunningStat lhs_stat, rhs_stat;
  std::vector<double> pt, ball;
  for (int s = 0; s < samples; ++s) {
    sample_sphere_into(pt, spec, rng);
    // Rejection-free ball point: sphere direction scaled by r * U^{1/n}.
    const double u = std::pow(rng.uniform(), inv_n);
    ball.assign(pt.begin(), pt.end());
    for (auto& v : ball) v *= u;
    lhs_stat.add(spec.radius * vol * f.grad(SiteView(ball, 0), coord));
    rhs_stat.add(area * f.value(SiteView(pt, 0)) * pt[static_cast<std::size_t>(coord)]);
  }
  CheckResult r;
  r.lhs = lhs_stat.mean();
  r.lhs_se = lhs_stat.std_error();
  r.rhs = rhs_stat.mean();
  r.rhs_se = rhs_stat.std_error();
  const double se = std::sqrt(r.lhs_se * r.lhs_se + r.rhs_se * r.rhs_se);
  r.discrepancy_sigma = se > 0.0 ? (r.lhs - r.rhs) / se : 0.0;
  return r;
}

CheckResult telescoping_check(const PolyObservable& f, int i, int j, const SphereSpec& spec,
                              int samples, Rng& rng) {
  spec.validate();
  if (!(i < j)) throw std::invalid_argument("telescoping_check: need i < j");
  if (i < 0 || j >= spec.dimension)
    throw std::invalid_argument("telescoping_check: coordinates outside dimension");

  const LocalFunction lhs_poly =
      f.poly().angular_derivative(i, j) * LocalFunction::site(i) * LocalFunction::site(j);
  LocalFunction rhs_poly;
  for (int k = i; k < j; ++k)
    rhs_poly += f.poly().angular_derivative(k, k + 1) * LocalFunction::site(k) *
                LocalFunction::site(k + 1);

  RunningStat lhs_stat, rhs_stat, diff_stat;
  double max_gap = 0.0;
  std::vector<double> pt;
  for (int s = 0; s < samples; ++s) {
    sample_sphere_into(pt, spec, rng);
    SiteView view(pt, 0);
    const double l = lhs_poly.eval(view);
    const double r = rhs_poly.eval(view);
    lhs_stat.add(l);
    rhs_stat.add(r);
    diff_stat.add(l - r);
    max_gap = std::max(max_gap, std::abs(l - r));
  }
  CheckResult r;
  r.lhs = lhs_stat.mean();
  r.lhs_se = lhs_stat.std_error();
  r.rhs = rhs_stat.mean();
  r.rhs_se = rhs_stat.std_error();
  const double dse = diff_stat.std_error();
  r.discrepancy_sigma = dse > 0.0 ? diff_stat.mean() / dse : 0.0;
  r.max_pointwise_gap = max_gap;
  return r;
}

EnsembleGap ensemble_gap(const LocalFunction& g, int N, double y) {
  if (N < 2) throw std::invalid_argument("ensemble_gap: N must be >= 2");
  EnsembleGap out;
  const double r = y * std::sqrt(static_cast<double>(N));
  out.sphere_value = expect_sphere(g, N, r, 0);
  out.gaussian_value = expect_gaussian(g, y);
  out.scaled_gap = N * std::abs(out.sphere_value - out.gaussian_value);
  out.exact = true;
  return out;
}

EnsembleGap ensemble_gap_mc(const Observable& g, int N, double y, int samples, Rng& rng) {
  if (N < 2) throw std::invalid_argument("ensemble_gap: N must be >= 2");
  auto sup = g.support();
  if (!sup) throw std::invalid_argument("ensemble_gap: observable needs finite support");
  SphereSpec spec{N, y * std::sqrt(static_cast<double>(N))};
  RunningStat stat;
  std::vector<double> pt;
  for (int s = 0; s < samples; ++s) {
    sample_sphere_into(pt, spec, rng);
    stat.add(g.value(SiteView(pt, 0)));
  }
  EnsembleGap out;
  out.sphere_value = stat.mean();
  out.gaussian_value = gaussian_expectation(g, y);
  out.scaled_gap = N * std::abs(out.sphere_value - out.gaussian_value);
  out.scaled_gap_se = N * stat.std_error();
  out.exact = false;
  return out;
}

}  // namespace fluctlab
