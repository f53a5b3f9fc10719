#include "fluctlab/observable.hpp"

#include <cmath>

#include "fluctlab/quadrature.hpp"
#include "fluctlab/sphere.hpp"

namespace fluctlab {

PolyObservable::PolyObservable(LocalFunction f) : f_(std::move(f)) {}

const LocalFunction* PolyObservable::cached_grad(int site) const {
  auto it = grads_.find(site);
  if (it == grads_.end()) it = grads_.emplace(site, f_.derivative(site)).first;
  return &it->second;
}

const LocalFunction* PolyObservable::cached_hess(int i, int j) const {
  if (i > j) std::swap(i, j);
  auto key = std::make_pair(i, j);
  auto it = hesses_.find(key);
  if (it == hesses_.end()) it = hesses_.emplace(key, f_.derivative(i).derivative(j)).first;
  return &it->second;
}

double PolyObservable::grad(const SiteView& p, int site) const { return cached_grad(site)->eval(p); }

double PolyObservable::hess(const SiteView& p, int i, int j) const {
  return cached_hess(i, j)->eval(p);
}

std::optional<std::pair<int, int>> PolyObservable::support() const {
  if (f_.empty() || f_.degree() == 0) return std::make_pair(0, 0);
  return std::make_pair(f_.lo_site(), f_.hi_site());
}

double EnergyObservable::value(const SiteView& p) const {
  double e = 0.0;
  for (int i = 0; i < n_; ++i) e += p[i] * p[i];
  return 0.5 * e;
}

double apply_bond_generator(const Observable& f, const SiteView& p, int x, int x1,
                            const Coupling& a) {
  const double px = p[x];
  const double ps = p[x1];
  const double fx = f.grad(p, x);
  const double fs = f.grad(p, x1);
  const double fxx = f.hess(p, x, x);
  const double fss = f.hess(p, x1, x1);
  const double fxs = f.hess(p, x, x1);
  const double av = a(px, ps);
  const double xa = ps * a.dr(px, ps) - px * a.ds(px, ps);
  const double xf = ps * fx - px * fs;
  const double xxf = ps * ps * fxx - 2.0 * px * ps * fxs + px * px * fss - ps * fs - px * fx;
  return 0.5 * (av * xxf + xa * xf);
}

double apply_generator(const Observable& f, const VelocityField& p, const ModelParams& params) {
  if (!f.has_hess())
    throw MissingDerivativeError("apply_generator: observable lacks second derivatives");
  const int n = p.size();
  const int nb = params.n_bonds();
  SiteView view(p);
  // Restrict the bond sum to the observable support when it is local.
  int lo = 0, hi = n - 1;
  bool restrict = false;
  if (auto sup = f.support(); sup && params.topology == Topology::open) {
    lo = sup->first;
    hi = sup->second;
    restrict = true;
  }
  double sum = 0.0;
  for (int b = 0; b < nb; ++b) {
    if (restrict && (b + 1 < lo || b > hi)) continue;
    sum += apply_bond_generator(f, view, b, (b + 1) % n, params.coupling);
  }
  return sum;
}

double dirichlet_form(const Observable& f, const ModelParams& params, const Measure& measure) {
  params.validate();
  const int n = params.n_sites;
  const int nb = params.n_bonds();
  const Coupling& a = params.coupling;

  if (measure.kind == Measure::Kind::gaussian) {
    auto sup = f.support();
    if (!sup) throw std::invalid_argument("dirichlet_form: observable needs finite support");
    double sum = 0.0;
    for (int b = 0; b < nb; ++b) {
      const int x = b;
      const int x1 = (b + 1) % n;
      // Bonds that miss the support have Xf = 0 identically.
      if (x1 < sup->first || x > sup->second) continue;
      const int lo = std::min({sup->first, x, x1});
      const int hi = std::max({sup->second, x, x1});
      FnObservable integrand(
          [&f, &a, x, x1](const SiteView& p) {
            const double xf = p[x1] * f.grad(p, x) - p[x] * f.grad(p, x1);
            return a(p[x], p[x1]) * xf * xf;
          },
          nullptr, nullptr, std::make_pair(lo, hi));
      sum += gaussian_expectation(integrand, params.y, 12);
    }
    return 0.5 * sum;
  }

  // Microcanonical: uniform measure on the sphere of total kinetic energy
  // matching the Gaussian scale, radius y*sqrt(n).
  SphereSpec spec{n, params.y * std::sqrt(static_cast<double>(n))};
  Rng rng(measure.mc_seed);
  std::vector<double> pt;
  double sum = 0.0;
  for (int s = 0; s < measure.mc_samples; ++s) {
    sample_sphere_into(pt, spec, rng);
    SiteView view(pt, 0);
    for (int b = 0; b < nb; ++b) {
      const int x = b;
      const int x1 = (b + 1) % n;
      const double xf = pt[static_cast<std::size_t>(x1)] * f.grad(view, x) -
                        pt[static_cast<std::size_t>(x)] * f.grad(view, x1);
      sum += a(pt[static_cast<std::size_t>(x)], pt[static_cast<std::size_t>(x1)]) * xf * xf;
    }
  }
  return 0.5 * sum / static_cast<double>(measure.mc_samples);
}

}  // namespace fluctlab
