#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "fluctlab/coupling.hpp"
#include "fluctlab/rng.hpp"

namespace fluctlab {

enum class Topology { periodic, open };

struct ModelParams {
  int n_sites = 0;
  double y = 1.0;  // equilibrium scale: sites are i.i.d. N(0, y^2) in equilibrium
  Coupling coupling = Coupling::constant(1.0);
  Topology topology = Topology::periodic;

  void validate() const {
    if (n_sites < 3) throw std::invalid_argument("model: n_sites must be >= 3");
    if (!(y > 0.0)) throw std::invalid_argument("model: y must be positive");
  }
  int n_bonds() const { return topology == Topology::periodic ? n_sites : n_sites - 1; }
};

// The simulated state: one velocity per lattice site.
struct VelocityField {
  std::vector<double> p;
  Topology topology = Topology::periodic;

  int size() const { return static_cast<int>(p.size()); }

  // Site access with topology-aware index handling.
  double at(int site) const {
    const int n = size();
    if (topology == Topology::periodic) {
      int i = site % n;
      if (i < 0) i += n;
      return p[static_cast<std::size_t>(i)];
    }
    if (site < 0 || site >= n) throw std::out_of_range("velocity field: site outside open chain");
    return p[static_cast<std::size_t>(site)];
  }
};

// Read-only site-indexed view over either a field or a coordinate window.
// Used so observables can be evaluated both on simulation states and on
// quadrature / sphere-sample windows with arbitrary site offsets.
class SiteView {
 public:
  explicit SiteView(const VelocityField& f, int offset = 0)
      : field_(&f), offset_(offset) {}
  SiteView(std::span<const double> window, int lo_site)
      : window_(window), lo_(lo_site) {}

  double operator[](int site) const {
    if (field_) return field_->at(site + offset_);
    const int i = site - lo_;
    if (i < 0 || i >= static_cast<int>(window_.size()))
      throw std::out_of_range("site view: site outside window");
    return window_[static_cast<std::size_t>(i)];
  }

  SiteView shifted(int delta) const {
    SiteView v = *this;
    if (v.field_) {
      v.offset_ += delta;
    } else {
      v.lo_ -= delta;  // view[site] = window[site + delta - lo]
    }
    return v;
  }

 private:
  const VelocityField* field_ = nullptr;
  int offset_ = 0;
  std::span<const double> window_;
  int lo_ = 0;
};

double total_energy(const VelocityField& p);

// Instantaneous energy current across bond (x, x+1):
//   W = a(p_x, p_{x+1}) (p_x^2 - p_{x+1}^2) - X[a] p_x p_{x+1},
// with X[a] = p_{x+1} d_r a - p_x d_s a. Throws on an invalid bond index.
double current(const VelocityField& p, int bond, const Coupling& a);

// Same formula from raw pair values (hot-loop form).
inline double current_pair(double px, double ps, const Coupling& a) {
  const double av = a(px, ps);
  const double xa = ps * a.dr(px, ps) - px * a.ds(px, ps);
  return av * (px * px - ps * ps) - xa * px * ps;
}

// i.i.d. centered Gaussians with standard deviation y per site.
VelocityField sample_equilibrium(const ModelParams& params, Rng& rng);

}  // namespace fluctlab
