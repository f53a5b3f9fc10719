#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "fluctlab/polynomial.hpp"

namespace fluctlab {

struct MissingDerivativeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A scalar function of the field with per-site first derivatives and (when
// available) second derivatives in any pair of coordinates. The generator
// needs the second derivatives; estimators that only integrate values do not.
class Observable {
 public:
  virtual ~Observable() = default;
  virtual double value(const SiteView& p) const = 0;
  virtual double grad(const SiteView& p, int site) const = 0;
  virtual double hess(const SiteView&, int, int) const {
    throw MissingDerivativeError("observable: second derivatives not available");
  }
  virtual bool has_hess() const { return false; }
  // Inclusive site window outside of which the function is constant.
  virtual std::optional<std::pair<int, int>> support() const { return std::nullopt; }
};

// Polynomial observable with exact derivatives.
class PolyObservable final : public Observable {
 public:
  explicit PolyObservable(LocalFunction f);
  double value(const SiteView& p) const override { return f_.eval(p); }
  double grad(const SiteView& p, int site) const override;
  double hess(const SiteView& p, int i, int j) const override;
  bool has_hess() const override { return true; }
  std::optional<std::pair<int, int>> support() const override;
  const LocalFunction& poly() const { return f_; }

 private:
  const LocalFunction* cached_grad(int site) const;
  const LocalFunction* cached_hess(int i, int j) const;

  LocalFunction f_;
  mutable std::map<int, LocalFunction> grads_;
  mutable std::map<std::pair<int, int>, LocalFunction> hesses_;
};

// Observable built from callables; derivatives optional.
class FnObservable final : public Observable {
 public:
  using ValueFn = std::function<double(const SiteView&)>;
  using GradFn = std::function<double(const SiteView&, int)>;
  using HessFn = std::function<double(const SiteView&, int, int)>;

  FnObservable(ValueFn v, GradFn g = nullptr, HessFn h = nullptr,
               std::optional<std::pair<int, int>> support = std::nullopt)
      : value_(std::move(v)), grad_(std::move(g)), hess_(std::move(h)), support_(support) {}

  double value(const SiteView& p) const override { return value_(p); }
  double grad(const SiteView& p, int site) const override {
    if (!grad_) throw MissingDerivativeError("observable: gradient not available");
    return grad_(p, site);
  }
  double hess(const SiteView& p, int i, int j) const override {
    if (!hess_) throw MissingDerivativeError("observable: second derivatives not available");
    return hess_(p, i, j);
  }
  bool has_hess() const override { return static_cast<bool>(hess_); }
  std::optional<std::pair<int, int>> support() const override { return support_; }

 private:
  ValueFn value_;
  GradFn grad_;
  HessFn hess_;
  std::optional<std::pair<int, int>> support_;
};

// Total energy E = 1/2 sum p_x^2 as an observable over the whole field.
class EnergyObservable final : public Observable {
 public:
  explicit EnergyObservable(int n_sites) : n_(n_sites) {}
  double value(const SiteView& p) const override;
  double grad(const SiteView& p, int site) const override { return p[site]; }
  double hess(const SiteView&, int i, int j) const override { return i == j ? 1.0 : 0.0; }
  bool has_hess() const override { return true; }
  std::optional<std::pair<int, int>> support() const override { return std::make_pair(0, n_ - 1); }

 private:
  int n_;
};

// (L f)(p) for the bond-noise generator
//   L = 1/2 sum_bonds X[ a(p_x, p_{x+1}) X ],  X = p_{x+1} d_x - p_x d_{x+1},
// expanded per bond as 1/2 [ a X^2 f + (X a)(X f) ].
double apply_generator(const Observable& f, const VelocityField& p, const ModelParams& params);

// Single-bond piece of the generator (bond (x, x+1), periodic wrap handled by caller indices).
double apply_bond_generator(const Observable& f, const SiteView& p, int x, int x1, const Coupling& a);

struct Measure {
  enum class Kind { gaussian, microcanonical } kind = Kind::gaussian;
  // Microcanonical sampling controls.
  int mc_samples = 100000;
  std::uint64_t mc_seed = 1234;
  static Measure gaussian() { return Measure{}; }
  static Measure microcanonical(int samples, std::uint64_t seed = 1234) {
    Measure m;
    m.kind = Kind::microcanonical;
    m.mc_samples = samples;
    m.mc_seed = seed;
    return m;
  }
};

// D(f) = 1/2 sum_bonds E[ a (X f)^2 ] under the chosen equilibrium measure.
// Gaussian expectations use quadrature over the observable support; the
// microcanonical variant Monte-Carlo samples the energy sphere of radius
// y*sqrt(n_sites).
double dirichlet_form(const Observable& f, const ModelParams& params, const Measure& measure);

}  // namespace fluctlab
