#include "fluctlab/variational.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <iostream>

#include "fluctlab/sphere.hpp"
#include "fluctlab/stats.hpp"

namespace fluctlab {

LocalFunction cyclic_gradient(const LocalFunction& F) {
  LocalFunction xi;
  if (F.empty() || F.degree() == 0) return xi;
  const int lo = F.lo_site();
  const int hi = F.hi_site();
  // tau^j F depends on sites lo+j..hi+j; it touches {0,1} iff -hi <= j <= 1-lo.
  for (int j = -hi; j <= 1 - lo; ++j) xi += F.translated(j).angular_derivative(0, 1);
  xi.prune(0.0);
  return xi;
}

static LocalFunction target_plus(const LocalFunction& xi) {
  LocalFunction f = LocalFunction::site(0) * LocalFunction::site(1);
  f += xi;
  return f;
}

double quadratic_form(double y, const LocalFunction& F, const Coupling& a) {
  if (!(y > 0.0)) throw std::invalid_argument("quadratic_form: y must be positive");
  if (F.degree() > 24)
    throw std::invalid_argument(
        "quadratic_form: polynomial degree beyond the exact-moment budget; use a Monte Carlo "
        "estimate instead");
  const LocalFunction g = target_plus(cyclic_gradient(F));
  return expect_gaussian_weighted(g * g, y, a);
}

std::vector<LocalFunction> default_basis(int max_degree, int half_width, bool include_odd) {
  if (max_degree < 1 || half_width < 0) return {};
  const int n_sites = 2 * half_width + 1;

  // Enumerate monomial exponent vectors over sites -k..k with total degree in
  // [1, max_degree]; canonicalize by centering the support so lattice
  // translates are generated once.
  std::vector<LocalFunction> basis;
  std::vector<Monomial> seen;
  std::vector<int> exps(static_cast<std::size_t>(n_sites), 0);

  const auto emit = [&]() {
    int deg = 0;
    for (int e : exps) deg += e;
    if (deg < 1 || deg > max_degree) return;
    if (!include_odd && deg % 2 == 1) return;
    Monomial m;
    for (int i = 0; i < n_sites; ++i)
      if (exps[static_cast<std::size_t>(i)] > 0)
        m.emplace_back(i - half_width, exps[static_cast<std::size_t>(i)]);
    if (m.empty()) return;
    // Canonical translate: move the support to start at -floor(width/2), so
    // lattice shifts of the same monomial collapse to one representative.
    const int lo = m.front().first;
    const int width = m.back().first - lo;
    const int shift = -(width / 2) - lo;
    for (auto& [site, e] : m) site += shift;
    for (const auto& s : seen)
      if (s == m) return;
    LocalFunction F = LocalFunction::monomial(m, 1.0);
    if (cyclic_gradient(F).is_zero(0.0)) return;
    seen.push_back(m);
    basis.push_back(std::move(F));
  };

  // Odometer over exponent vectors.
  while (true) {
    emit();
    int i = 0;
    for (; i < n_sites; ++i) {
      auto& e = exps[static_cast<std::size_t>(i)];
      if (++e <= max_degree) break;
      e = 0;
    }
    if (i == n_sites) break;
  }
  return basis;
}

DiffusionResult minimize_diffusion_coefficient(double y, const std::vector<LocalFunction>& basis,
                                               const Coupling& a) {
  if (!(y > 0.0)) throw std::invalid_argument("minimize: y must be positive");
  const auto m = static_cast<int>(basis.size());

  std::vector<LocalFunction> xis;
  xis.reserve(basis.size());
  int max_deg = 2;
  for (const auto& F : basis) {
    xis.push_back(cyclic_gradient(F));
    max_deg = std::max(max_deg, xis.back().degree() + 1);
  }
  PairMomentTable table(a, y, 2 * max_deg + 2);
  const auto weighted = [&](const LocalFunction& f) {
    return expect_gaussian_weighted(f, y, table);
  };

  const LocalFunction T = LocalFunction::site(0) * LocalFunction::site(1);
  const double t0 = weighted(T * T);

  DiffusionResult out;
  out.y = y;
  out.coupling = a.describe();
  out.bg_plug_scale = 2.0;
  for (const auto& F : basis) out.basis_labels.push_back(F.to_string());

  if (m == 0) {
    out.form_value = t0;
    out.a_hat = t0 / std::pow(y, 4);
    return out;
  }

  Eigen::MatrixXd G(m, m);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    b(i) = weighted(T * xis[static_cast<std::size_t>(i)]);
    for (int j = i; j < m; ++j) {
      G(i, j) = weighted(xis[static_cast<std::size_t>(i)] * xis[static_cast<std::size_t>(j)]);
      G(j, i) = G(i, j);
    }
  }

  // Spectral pseudo-inverse with relative rank tolerance; monomial-gradient
  // Gram matrices are routinely ill-conditioned.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const Eigen::VectorXd evals = es.eigenvalues();
  const double lam_max = std::max(evals(m - 1), 0.0);
  const double rank_tol = 1e-12 * std::max(lam_max, 1e-300);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(m);
  int dropped = 0;
  double lam_min_kept = lam_max;
  for (int i = 0; i < m; ++i) {
    if (evals(i) > rank_tol) {
      inv(i) = 1.0 / evals(i);
      lam_min_kept = std::min(lam_min_kept, evals(i));
    } else {
      ++dropped;
    }
  }
  if (dropped > 0)
    std::cerr << "minimize_diffusion_coefficient: dropped " << dropped
              << " dependent basis column(s)\n";
  const Eigen::VectorXd c =
      -(es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * b);

  out.coefficients.assign(c.data(), c.data() + m);
  out.form_value = t0 + 2.0 * c.dot(b) + c.dot(G * c);
  out.dropped_columns = dropped;
  out.gram_condition = (lam_min_kept > 0.0 && lam_max > 0.0) ? lam_max / lam_min_kept : 1.0;
  if (out.form_value < 0.0)
    throw std::runtime_error("minimize: negative quadratic form (moment evaluation bug)");
  out.a_hat = out.form_value / std::pow(y, 4);
  return out;
}

HyConditionReport check_Hy_conditions(const LocalFunction& xi, double y, double tol) {
  HyConditionReport rep;
  rep.mean_value = expect_gaussian(xi, y);
  rep.mean_zero = std::abs(rep.mean_value) <= tol;

  const LocalFunction T = LocalFunction::site(0) * LocalFunction::site(1);
  rep.pairing_value = expect_gaussian(T * xi, y);
  rep.orthogonal = std::abs(rep.pairing_value) <= tol;

  const double scale = std::max(xi.max_abs_coeff(), 1.0);
  const double poly_tol = 1e-12 * scale;
  const int lo = xi.empty() ? 0 : xi.lo_site();
  const int hi = xi.empty() ? 0 : xi.hi_site();
  const int w = std::max(hi - lo + 2, 3);

  // iii) X_{i,i+1}(tau^j xi) = X_{j,j+1}(tau^i xi) for disjoint bonds.
  rep.commuting_bonds = true;
  for (int i = -w; i <= w; ++i) {
    for (int j = i + 2; j <= w; ++j) {
      LocalFunction lhs = xi.translated(j).angular_derivative(i, i + 1);
      lhs -= xi.translated(i).angular_derivative(j, j + 1);
      const double viol = lhs.max_abs_coeff();
      rep.max_iii_violation = std::max(rep.max_iii_violation, viol);
      if (viol > poly_tol && rep.commuting_bonds) {
        rep.commuting_bonds = false;
        if (rep.witness.empty())
          rep.witness = "condition iii at (i,j)=(" + std::to_string(i) + "," + std::to_string(j) +
                        "): " + lhs.to_string();
      }
    }
  }

  // iv) p_{i+1}[X_{i+1,i+2}(tau^i xi) - X_{i,i+1}(tau^{i+1} xi)]
  //        = p_{i+2} tau^i xi + p_i tau^{i+1} xi.
  rep.adjacent_identity = true;
  for (int i = -w; i <= w; ++i) {
    LocalFunction lhs = xi.translated(i).angular_derivative(i + 1, i + 2);
    lhs -= xi.translated(i + 1).angular_derivative(i, i + 1);
    lhs = LocalFunction::site(i + 1) * lhs;
    lhs -= LocalFunction::site(i + 2) * xi.translated(i);
    lhs -= LocalFunction::site(i) * xi.translated(i + 1);
    const double viol = lhs.max_abs_coeff();
    rep.max_iv_violation = std::max(rep.max_iv_violation, viol);
    if (viol > poly_tol && rep.adjacent_identity) {
      rep.adjacent_identity = false;
      if (rep.witness.empty())
        rep.witness = "condition iv at i=" + std::to_string(i) + ": " + lhs.to_string();
    }
  }
  return rep;
}

LocalFunction chain_translate_sum(const LocalFunction& F, int N) {
  LocalFunction psi;
  if (F.empty()) return psi;
  const int lo = F.lo_site();
  const int hi = F.hi_site();
  for (int x = -N - lo; x <= N - hi; ++x) psi += F.translated(x);
  return psi;
}

namespace {

// E_mu[a(p_b, p_{b+1}) * f] on the sphere of sites -N..N, either exactly
// (constant a) or by Monte Carlo.
double sphere_weighted(const LocalFunction& f, int bond, int N, double y, const Coupling& a,
                       int mc_samples, Rng* rng) {
  const int n = 2 * N + 1;
  const double r = y * std::sqrt(static_cast<double>(n));
  if (a.is_constant()) return a.constant_value() * expect_sphere(f, n, r, -N);
  if (rng == nullptr) throw std::invalid_argument("sphere_weighted: rng required for MC path");
  SphereSpec spec{n, r};
  RunningStat stat;
  std::vector<double> pt;
  for (int s = 0; s < mc_samples; ++s) {
    sample_sphere_into(pt, spec, *rng);
    SiteView view(pt, -N);
    stat.add(a(view[bond], view[bond + 1]) * f.eval(view));
  }
  return stat.mean();
}

}  // namespace

VarianceValue gradient_type_variance(VarianceTarget target, int N, double y, const Coupling& a,
                                     const std::optional<LocalFunction>& F, int mc_samples,
                                     std::uint64_t mc_seed) {
  if (N < 1) throw std::invalid_argument("gradient_type_variance: N must be >= 1");
  const int n = 2 * N + 1;
  const double r = y * std::sqrt(static_cast<double>(n));

  // Potential whose generator image is the current sum: U = sum_x x p_x^2,
  // with X_{x,x+1} U = -2 p_x p_{x+1}.
  LocalFunction U;
  for (int x = -N; x <= N; ++x)
    U += static_cast<double>(x) * LocalFunction::site(x) * LocalFunction::site(x);

  VarianceValue out;
  Rng rng(mc_seed);

  switch (target) {
    case VarianceTarget::BB: {
      // 2 D(U) = sum_bonds E[a (X U)^2] = 4 sum E[a p_x^2 p_{x+1}^2].
      double sum = 0.0;
      for (int x = -N; x < N; ++x) {
        LocalFunction g = LocalFunction::site(x) * LocalFunction::site(x) *
                          LocalFunction::site(x + 1) * LocalFunction::site(x + 1);
        sum += 4.0 * sphere_weighted(g, x, N, y, a, mc_samples, &rng);
      }
      out.value = sum;
      out.exact = a.is_constant();
      break;
    }
    case VarianceTarget::HH: {
      if (!F) throw std::invalid_argument("gradient_type_variance: HH needs a local function");
      const LocalFunction psi = chain_translate_sum(*F, N);
      double sum = 0.0;
      for (int x = -N; x < N; ++x) {
        const LocalFunction xpsi = psi.angular_derivative(x, x + 1);
        if (xpsi.empty()) continue;
        sum += sphere_weighted(xpsi * xpsi, x, N, y, a, mc_samples, &rng);
      }
      out.value = sum;
      out.exact = a.is_constant();
      break;
    }
    case VarianceTarget::BH: {
      if (!F) throw std::invalid_argument("gradient_type_variance: BH needs a local function");
      const LocalFunction psi = chain_translate_sum(*F, N);
      double sum = 0.0;
      for (int x = -N; x < N; ++x) {
        const LocalFunction xpsi = psi.angular_derivative(x, x + 1);
        if (xpsi.empty()) continue;
        const LocalFunction xu = U.angular_derivative(x, x + 1);  // -2 p_x p_{x+1}
        sum += sphere_weighted(xu * xpsi, x, N, y, a, mc_samples, &rng);
      }
      out.value = sum;
      out.exact = a.is_constant();
      break;
    }
    case VarianceTarget::AB: {
      // -2 <A, U> with A = p_N^2 - p_{-N}^2; pure sphere moments, coupling-free.
      LocalFunction A = LocalFunction::site(N) * LocalFunction::site(N);
      A -= LocalFunction::site(-N) * LocalFunction::site(-N);
      out.value = -2.0 * expect_sphere(A * U, n, r, -N);
      out.exact = true;
      break;
    }
  }
  return out;
}

}  // namespace fluctlab
