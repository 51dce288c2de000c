#pragma once

#include <functional>
#include <vector>

namespace smoothlab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Hermite rule for the standard normal weight: sum w_i g(x_i) ~ E[g(Z)].
// Weights sum to 1. Rules are cached per n.
const QuadratureRule& gauss_hermite_normal(int n);

double normal_expectation(const std::function<double(double)>& g, int n = 200);

}  // namespace smoothlab
