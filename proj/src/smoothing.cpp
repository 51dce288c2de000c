#include "smoothlab/smoothing.hpp"

#include <boost/math/special_functions/owens_t.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace smoothlab {

namespace {

void check_rho(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must be in [0, 1]");
}

void check_sigma(double sigma) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
}

EstimateReport exact(double v, std::uint64_t seed) {
  EstimateReport r;
  r.estimate = v;
  r.std_error = 0.0;
  r.n_samples = 1;
  r.seed = seed;
  return r;
}

void require_exact(const Concept& c, const char* who) {
  if (!has_exact_distance(c))
    throw std::invalid_argument(std::string(who) + ": concept kind '" + kind_name(c) +
                                "' has no exact boundary distance");
}

}  // namespace

EstimateReport ou_apply(const Concept& c, double rho, const Vector& x, std::size_t n, std::uint64_t seed) {
  check_rho(rho);
  if (rho == 0.0) return exact(eval(c, x), seed);
  const double a = std::sqrt(1.0 - rho * rho);
  return mc_mean(n, seed, [&](Rng& rng) {
    return static_cast<double>(eval(c, Vector(a * x + rho * standard_normal(rng, c.ambient_dim))));
  });
}

EstimateReport ou_l1_error(const Concept& c, double rho, std::size_t n_outer, std::size_t n_inner,
                           std::uint64_t seed) {
  check_rho(rho);
  if (n_inner == 0) throw std::invalid_argument("ou_l1_error: n_inner must be >= 1");
  if (rho == 0.0) return exact(0.0, seed);
  const double a = std::sqrt(1.0 - rho * rho);
  return mc_mean(n_outer, seed, [&](Rng& rng) {
    Vector z = standard_normal(rng, c.ambient_dim);
    int fz = eval(c, z);
    double acc = 0.0;
    for (std::size_t j = 0; j < n_inner; ++j)
      acc += 1.0 - fz * eval(c, Vector(a * z + rho * standard_normal(rng, c.ambient_dim)));
    return acc / static_cast<double>(n_inner);
  });
}

double ou_l1_bound(double rho, double gsa) { return 2.0 * std::sqrt(std::numbers::pi * rho) * gsa; }

double ou_l1_error_halfspace(double b, double rho) {
  check_rho(rho);
  if (rho == 0.0) return 0.0;
  double r = std::sqrt(1.0 - rho * rho);
  return 8.0 * boost::math::owens_t(b, std::sqrt((1.0 - r) / (1.0 + r)));
}

GsaEstimate gsa_mc(const Concept& c, double delta, std::size_t n, std::uint64_t seed) {
  if (!(delta > 0.0)) throw std::invalid_argument("gsa_mc: delta must be > 0");
  require_exact(c, "gsa_mc");
  auto r = mc_means(n, seed, 2, [&](Rng& rng, double* out) {
    Vector z = standard_normal(rng, c.ambient_dim);
    Vector u = intrinsic(c, z);
    out[0] = out[1] = 0.0;
    if (eval_intrinsic(c, u) != -1) return;
    if (auto* in = std::get_if<Intersection>(&c.kind)) {
      double viol = 0.0;
      for (const auto& h : in->faces) viol = std::max(viol, -(h.w.dot(u) + h.b));
      if (viol > delta) return;
    }
    double d = boundary_distance_intrinsic(c, u).upper;
    out[0] = d <= delta ? 1.0 / delta : 0.0;
    out[1] = d <= 0.5 * delta ? 2.0 / delta : 0.0;
  });
  return {r[0], r[1], delta};
}

EstimateReport sensitivity(const Concept& c, const Vector& x, double sigma, std::size_t n, std::uint64_t seed) {
  check_sigma(sigma);
  if (sigma == 0.0) return exact(0.0, seed);
  const int fx = eval(c, x);
  return mc_mean(n, seed, [&](Rng& rng) {
    return eval(c, Vector(x + sigma * standard_normal(rng, c.ambient_dim))) != fx ? 1.0 : 0.0;
  });
}

EstimateReport expected_sensitivity(const Concept& c, const SamplerSpec& d, double sigma, std::size_t n_x,
                                    std::size_t n_z, std::uint64_t seed) {
  check_sigma(sigma);
  if (n_z == 0) throw std::invalid_argument("expected_sensitivity: n_z must be >= 1");
  if (sigma == 0.0) return exact(0.0, seed);
  return mc_mean(n_x, seed, [&](Rng& rng) {
    Vector x = draw(d, rng);
    int fx = eval(c, x);
    std::size_t flips = 0;
    for (std::size_t j = 0; j < n_z; ++j)
      flips += eval(c, Vector(x + sigma * standard_normal(rng, c.ambient_dim))) != fx;
    return static_cast<double>(flips) / static_cast<double>(n_z);
  });
}

double sensitivity_bound_b5(double gamma, double sigma, int k) {
  double r = gamma / sigma;
  return std::exp(-r * r / 5.0 + k);
}

double sensitivity_bound_b6(double gamma, double sigma, int k) {
  return k * std::exp(-gamma * gamma / (2.0 * sigma * sigma));
}

double sensitivity_bound_b11(int k, double M, double eps, double sigma) {
  return k * (2.0 * M * eps + std::exp(-eps * eps / (2.0 * sigma * sigma)));
}

EstimateReport opt_sigma_term(const Concept& c, const Dataset& ds, double sigma, std::size_t n_z, std::uint64_t seed) {
  check_sigma(sigma);
  const auto N = static_cast<std::size_t>(ds.X.rows());
  if (N == 0) throw std::invalid_argument("opt_sigma_term: empty dataset");
  if (sigma == 0.0) {
    std::size_t err = 0;
    for (std::size_t i = 0; i < N; ++i) err += eval(c, ds.X.row(static_cast<Eigen::Index>(i)).transpose()) != ds.y[i];
    return exact(static_cast<double>(err) / static_cast<double>(N), seed);
  }
  if (n_z == 0) throw std::invalid_argument("opt_sigma_term: n_z must be >= 1");
  std::vector<double> p(N);
  std::size_t shards = (N + kShardSize - 1) / kShardSize;
  parallel_shards(shards, [&](std::size_t s) {
    for (std::size_t i = s * kShardSize; i < std::min(N, (s + 1) * kShardSize); ++i) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      Vector x = ds.X.row(static_cast<Eigen::Index>(i)).transpose();
      std::size_t wrong = 0;
      for (std::size_t j = 0; j < n_z; ++j)
        wrong += eval(c, Vector(x + sigma * standard_normal(rng, c.ambient_dim))) != ds.y[i];
      p[i] = static_cast<double>(wrong) / static_cast<double>(n_z);
    }
  });
  double mean = 0.0, var = 0.0;
  for (double v : p) {
    mean += v;
    var += v * (1.0 - v) / static_cast<double>(n_z);
  }
  EstimateReport r;
  r.estimate = mean / static_cast<double>(N);
  r.std_error = std::sqrt(var) / static_cast<double>(N);
  r.n_samples = N * n_z;
  r.seed = seed;
  return r;
}

double margin_err_term(const Concept& c, const Dataset& ds, double gamma) {
  require_exact(c, "margin_err_term");
  if (!(gamma >= 0.0)) throw std::invalid_argument("margin_err_term: gamma must be >= 0");
  const auto N = static_cast<std::size_t>(ds.X.rows());
  if (N == 0) throw std::invalid_argument("margin_err_term: empty dataset");
  std::size_t bad = 0;
  for (std::size_t i = 0; i < N; ++i) {
    Vector x = ds.X.row(static_cast<Eigen::Index>(i)).transpose();
    bad += eval(c, x) != ds.y[i] || in_margin_boundary(c, x, gamma) == Tri::True;
  }
  return static_cast<double>(bad) / static_cast<double>(N);
}

EstimateReport translation_l1(const Concept& c, const Vector& u, const Vector& v, std::size_t n, std::uint64_t seed) {
  if (u == v) return exact(0.0, seed);
  return mc_mean(n, seed, [&](Rng& rng) {
    Vector z = standard_normal(rng, c.ambient_dim);
    return std::fabs(static_cast<double>(eval(c, Vector(u + z)) - eval(c, Vector(v + z))));
  });
}

double translation_bound(double gsa, const Vector& u, const Vector& v) { return 8.0 * gsa * (u - v).norm(); }

double default_rho(double eps, double gsa) {
  if (!(eps > 0.0) || !(gsa > 0.0)) throw std::invalid_argument("default_rho: eps and gsa must be > 0");
  double r = eps / gsa;
  return std::min(1.0, r * r / (4.0 * std::numbers::pi));
}

nlohmann::json to_json(const MetricReport& r) {
  return {{"suite_id", r.suite_id}, {"params", r.params}, {"estimate", r.estimate}, {"se", r.se},
          {"bound", r.bound},       {"pass", r.pass},     {"seed", r.seed},
          {"n", r.n}};
}

}  // namespace smoothlab
