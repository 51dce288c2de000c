#include "smoothlab/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace smoothlab {

namespace {

// Orthonormal probabilists' Hermite recurrence at x, rescaled to stay finite.
// Returns p_n / p_{n-1} (for Newton) and log sum_{j<n} p_j^2 (Christoffel).
struct HermiteEval {
  double ratio;
  double log_sum;
};

HermiteEval hermite_eval(int n, double x) {
  double prev = 0.0, cur = 1.0, sum = 0.0, log_scale = 0.0;
  for (int j = 0; j < n; ++j) {
    sum += cur * cur;
    double next = (x * cur - std::sqrt(static_cast<double>(j)) * prev) / std::sqrt(j + 1.0);
    prev = cur;
    cur = next;
    if (std::fabs(cur) > 1e100) {
      prev *= 1e-100;
      cur *= 1e-100;
      sum *= 1e-200;
      log_scale += 200.0 * std::log(10.0);
    }
  }
  return {cur / prev, std::log(sum) + log_scale};
}

// Golub-Welsch eigenvalues as starting points, Newton polish on p_n, and
// Christoffel weights 1 / sum_{j<n} p_j(x)^2 for the N(0,1) weight.
QuadratureRule build_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_normal: n must be >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), sub(std::max(n - 1, 0));
  for (int j = 1; j < n; ++j) sub[j - 1] = std::sqrt(static_cast<double>(j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()[i];
    for (int it = 0; it < 8 && n > 1; ++it) {
      double step = hermite_eval(n, x).ratio / std::sqrt(static_cast<double>(n));
      x -= step;
      if (std::fabs(step) <= 1e-16 * std::max(1.0, std::fabs(x))) break;
    }
    r.nodes[i] = x;
    r.weights[i] = std::exp(-hermite_eval(n, x).log_sum);
  }
  // symmetrize
  for (int i = 0; i < n / 2; ++i) {
    double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    double w = 0.5 * (r.weights[i] + r.weights[n - 1 - i]);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2) r.nodes[n / 2] = 0.0;
  return r;
}

}  // namespace

const QuadratureRule& gauss_hermite_normal(int n) {
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

double normal_expectation(const std::function<double(double)>& g, int n) {
  const auto& r = gauss_hermite_normal(n);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * g(r.nodes[i]);
  return s;
}

}  // namespace smoothlab
