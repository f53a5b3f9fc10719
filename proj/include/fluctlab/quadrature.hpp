#pragma once

#include <vector>

#include "fluctlab/observable.hpp"

namespace fluctlab {

// Nodes and weights for the standard normal weight, i.e. Gauss-Hermite in
// probabilists' normalization: sum_i w_i f(x_i) = E_{N(0,1)}[f] exactly for
// polynomials of degree <= 2*order - 1.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussHermiteRule& gauss_hermite(int order);  // cached

struct QuadratureBudget {
  int max_dims = 6;
  long max_points = 10'000'000;
};

// Tensorized Gauss-Hermite value of E_{nu_y}[g] over the support of g.
// Throws when the tensor grid exceeds the budget.
double gaussian_expectation(const Observable& g, double y, int order = 12,
                            const QuadratureBudget& budget = {});

}  // namespace fluctlab
