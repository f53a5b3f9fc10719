#include "fluctlab/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace fluctlab {

namespace {

GaussHermiteRule build_rule(int order) {
  if (order < 1) throw std::invalid_argument("quadrature: order must be >= 1");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite recurrence:
  // zero diagonal, off-diagonal sqrt(k).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = std::sqrt(static_cast<double>(k));
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussHermiteRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = v0 * v0;
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int order) {
  static std::mutex mu;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
  return it->second;
}

double gaussian_expectation(const Observable& g, double y, int order,
                            const QuadratureBudget& budget) {
  const auto sup = g.support();
  if (!sup) throw std::invalid_argument("gaussian_expectation: observable needs finite support");
  const int lo = sup->first;
  const int m = sup->second - sup->first + 1;
  if (m > budget.max_dims)
    throw std::invalid_argument("gaussian_expectation: quadrature budget exceeded (dims)");
  double points = 1.0;
  for (int d = 0; d < m; ++d) {
    points *= order;
    if (points > static_cast<double>(budget.max_points))
      throw std::invalid_argument("gaussian_expectation: quadrature budget exceeded (points)");
  }

  const auto& rule = gauss_hermite(order);
  std::vector<int> index(static_cast<std::size_t>(m), 0);
  std::vector<double> x(static_cast<std::size_t>(m), 0.0);
  double sum = 0.0;
  while (true) {
    double w = 1.0;
    for (int d = 0; d < m; ++d) {
      const auto i = static_cast<std::size_t>(index[static_cast<std::size_t>(d)]);
      x[static_cast<std::size_t>(d)] = y * rule.nodes[i];
      w *= rule.weights[i];
    }
    sum += w * g.value(SiteView(x, lo));
    int d = 0;
    for (; d < m; ++d) {
      auto& i = index[static_cast<std::size_t>(d)];
      if (++i < order) break;
      i = 0;
    }
    if (d == m) break;
  }
  return sum;
}

}  // namespace fluctlab
