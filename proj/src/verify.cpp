#include "smoothlab/lab.hpp"
#include "smoothlab/quadrature.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <set>

namespace smoothlab {

namespace {

using nlohmann::json;

class Suite {
 public:
  Suite(const std::string& id, const json& params, std::uint64_t seed) : id_(id), p_(params), seed_(seed) {}

  double num(const std::string& key, double def) {
    double v = def;
    if (p_.contains(key)) v = scalar_at(key);
    used_[key] = v;
    return v;
  }
  int integer(const std::string& key, int def) {
    double v = num(key, def);
    if (v != std::floor(v)) bad(key, "expected an integer");
    used_[key] = static_cast<int>(v);
    return static_cast<int>(v);
  }
  std::size_t count(const std::string& key, std::size_t def) {
    double v = num(key, static_cast<double>(def));
    if (v < 1 || v != std::floor(v)) bad(key, "expected a positive integer");
    used_[key] = static_cast<std::uint64_t>(v);
    return static_cast<std::size_t>(v);
  }
  std::vector<double> nums(const std::string& key, std::vector<double> def) {
    if (p_.contains(key)) {
      const json& v = p_[key];
      def.clear();
      if (v.is_array()) {
        for (const auto& e : v) {
          if (!e.is_number()) bad(key, "expected numbers");
          def.push_back(e.get<double>());
        }
      } else {
        def.push_back(scalar_at(key));
      }
      if (def.empty()) bad(key, "empty list");
    }
    used_[key] = def;
    return def;
  }
  std::vector<int> ints(const std::string& key, const std::vector<int>& def) {
    std::vector<double> v = nums(key, std::vector<double>(def.begin(), def.end()));
    std::vector<int> out;
    for (double x : v) {
      if (x != std::floor(x)) bad(key, "expected integers");
      out.push_back(static_cast<int>(x));
    }
    used_[key] = out;
    return out;
  }

  std::uint64_t sub(const std::string& name) const { return derive_seed(seed_, id_ + "/" + name); }
  const std::string& id() const { return id_; }

  void add(json params, Check c, double est, double se, double bound, std::uint64_t n, std::uint64_t seed,
           double tol = 0.0) {
    rows_.push_back(judge(id_, std::move(params), c, est, se, bound, n, seed, tol));
  }
  void add(json params, Check c, const EstimateReport& e, double bound, double tol = 0.0) {
    add(std::move(params), c, e.estimate, e.std_error, bound, e.n_samples, e.seed, tol);
  }
  void add_exact(json params, Check c, double value, double bound, double tol = 0.0) {
    add(std::move(params), c, value, 0.0, bound, 0, 0, tol);
  }
  void add_check(json params, const CheckReport& rep) {
    for (const auto& r : rep.rows) {
      json p = params;
      p["direction"] = r.direction;
      p["t"] = r.lo;
      add(p, Check::Upper, r.estimate, r.se, r.bound, rep.n, rep.seed);
    }
  }

  std::vector<MetricReport> take() { return std::move(rows_); }
  const json& used() const { return used_; }

 private:
  [[noreturn]] void bad(const std::string& key, const std::string& what) const {
    throw ConfigError("verify " + id_ + ": parameter '" + key + "': " + what);
  }
  double scalar_at(const std::string& key) const {
    const json& v = p_[key];
    if (!v.is_number()) bad(key, "expected a number");
    return v.get<double>();
  }

  std::string id_;
  const json& p_;
  std::uint64_t seed_;
  json used_ = json::object();
  std::vector<MetricReport> rows_;
};

template <class F>
double simpson(F f, double lo, double hi, int n) {
  double h = (hi - lo) / n, s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

Vector unit(int d, int i) {
  Vector v = Vector::Zero(d);
  v[i] = 1.0;
  return v;
}

Matrix orthonormal_rows(int k, int d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix G(d, k);
  for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = std::normal_distribution<double>()(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
  return Matrix(Q.transpose());
}

Matrix unit_rows(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix S(n, d);
  for (int i = 0; i < n; ++i) S.row(i) = standard_normal(rng, d).normalized().transpose();
  return S;
}

Concept random_intersection(int k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Halfspace> faces;
  for (int i = 0; i < k; ++i) {
    Halfspace h;
    h.w = standard_normal(rng, k).normalized();
    h.b = 0.5 + std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    faces.push_back(h);
  }
  return make_intersection(faces, k);
}

double phi(double b) { return normal_pdf(b); }

// Shell bias of the one-sided GSA estimator: at most delta phi(1)/2 for a halfspace
// and delta/8 from the corner of a quadrant; delta/4 covers both.
double gsa_bias_allowance(double delta) { return delta / 4.0; }

// E_z |T_rho f(z) - f(z)| for f = sign(z + b), Simpson split at the jump.
double ou_l1_quadrature(double b, double rho) {
  double a = std::sqrt(1.0 - rho * rho);
  auto g = [&](double z, double f) {
    return std::fabs(2.0 * normal_cdf((a * z + b) / rho) - 1.0 - f) * normal_pdf(z);
  };
  return simpson([&](double z) { return g(z, -1.0); }, -12.0, -b, 200000) +
         simpson([&](double z) { return g(z, 1.0); }, -b, 12.0, 200000);
}

// T_rho sign at sqrt(1 - rho^2) z + x, i.e. the target of p_z(x).
double ou_sign_oracle(double z, double x, double rho) {
  return 2.0 * normal_cdf((std::sqrt(1.0 - rho * rho) * z + x) / rho) - 1.0;
}

std::vector<double> z_draws(std::uint64_t seed, int count) {
  Rng rng(seed);
  std::vector<double> z;
  for (int i = 0; i < count; ++i) z.push_back(std::normal_distribution<double>()(rng));
  return z;
}

struct Gap {
  double mean = 0.0, se = 0.0;
};

Gap mean_and_se(const std::vector<double>& v) {
  double s = 0.0, s2 = 0.0;
  for (double x : v) {
    s += x;
    s2 += x * x;
  }
  double n = static_cast<double>(v.size()), m = s / n;
  return {m, n > 1 ? std::sqrt(std::max(0.0, s2 / n - m * m) / (n - 1.0)) : 0.0};
}

// Least-squares line; returns slope and R^2 (through the origin when origin is set).
std::pair<double, double> line_fit(const std::vector<double>& xs, const std::vector<double>& ys, bool origin) {
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxy = 0, sxx = 0, ss_tot = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = origin ? xs[i] : xs[i] - mx, dy = origin ? ys[i] : ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    ss_tot += (ys[i] - my) * (ys[i] - my);
  }
  double slope = sxy / sxx, icpt = origin ? 0.0 : my - slope * mx, ss_res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) ss_res += std::pow(ys[i] - icpt - slope * xs[i], 2);
  return {slope, ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0};
}

// ---- numbered suites ----

void suite_34(Suite& s) {
  auto dims = s.ints("d", {1, 3});
  auto bs = s.nums("b", {0.0, 0.5, 1.0});
  auto rhos = s.nums("rho", {0.01, 0.04, 0.09});
  auto n = s.count("n", 100000);
  auto n_inner = s.count("n_inner", 1);
  for (int d : dims) {
    Rng rng(s.sub("w/" + std::to_string(d)));
    Vector w = d == 1 ? Vector::Ones(1) : Vector(standard_normal(rng, d).normalized());
    for (double b : bs)
      for (double rho : rhos) {
        auto c = make_halfspace(w, b);
        auto e = ou_l1_error(c, rho, n, n_inner, s.sub("d" + std::to_string(d) + "/b" + std::to_string(b) + "/rho" +
                                                        std::to_string(rho)));
        json p = {{"d", d}, {"b", b}, {"rho", rho}};
        p["kind"] = "bound";
        s.add(p, Check::Upper, e, ou_l1_bound(rho, phi(b)));
        p["kind"] = "quadrature";
        s.add(p, Check::Match, e, ou_l1_quadrature(b, rho), 3.0 * e.std_error);
      }
  }
}

void suite_b5(Suite& s) {
  auto ks = s.ints("k", {1, 2, 3, 4});
  double gamma = s.num("gamma", 0.6), sigma = s.num("sigma", 0.1);
  int trials = s.integer("trials", 3), points = s.integer("points", 3);
  auto n = s.count("n", 20000);
  for (int k : ks) {
    Rng rng(s.sub("k" + std::to_string(k)));
    for (int trial = 0; trial < trials; ++trial) {
      std::vector<std::pair<std::string, Concept>> cs{
          {"intersection", random_intersection(k, derive_seed(s.sub("faces"), static_cast<std::uint64_t>(10 * k + trial)))},
          {"ball", make_ball(standard_normal(rng, k) * 0.3, 1.0)},
          {"halfspace", make_halfspace(standard_normal(rng, k), 0.1)}};
      for (const auto& [name, c] : cs)
        for (int pt = 0; pt < points; ++pt) {
          Vector x;
          do x = standard_normal(rng, k) * 1.5;
          while (boundary_distance(c, x).value() < gamma);
          auto e = sensitivity(c, x, sigma, n, derive_seed(s.sub("mc"), rng()));
          s.add({{"k", k}, {"concept", name}, {"trial", trial}, {"point", pt}, {"gamma", gamma}, {"sigma", sigma}},
                Check::Upper, e, sensitivity_bound_b5(gamma, sigma, k));
        }
    }
  }
}

void suite_b6(Suite& s) {
  auto ks = s.ints("k", {2, 5, 10});
  double gamma = s.num("gamma", 0.3), sigma = s.num("sigma", 0.1);
  int points = s.integer("points", 5);
  auto n = s.count("n", 20000);
  for (int k : ks) {
    const int d = k + 2;
    auto c = lift(random_intersection(k, s.sub("faces/" + std::to_string(k))),
                  orthonormal_rows(k, d, s.sub("basis/" + std::to_string(k))));
    Rng rng(s.sub("points/" + std::to_string(k)));
    int inside = 0, outside = 0;
    for (int tries = 0; (inside < points || outside < points) && tries < 1000000; ++tries) {
      Vector x = standard_normal(rng, d) * 1.5;
      if (boundary_distance(c, x).value() < gamma) continue;
      bool in = eval(c, x) == 1;
      int& slot = in ? inside : outside;
      if (slot >= points) continue;
      auto e = sensitivity(c, x, sigma, n, derive_seed(s.sub("mc/" + std::to_string(k)), rng()));
      s.add({{"k", k}, {"side", in ? "inside" : "outside"}, {"point", slot}, {"gamma", gamma}, {"sigma", sigma}},
            Check::Upper, e, sensitivity_bound_b6(gamma, sigma, k));
      ++slot;
    }
  }
}

void suite_b9(Suite& s) {
  int k = s.integer("k", 2), d = s.integer("d", 5);
  double eta = s.num("eta", 0.1), sigma = s.num("sigma", 0.1);
  auto n = s.count("n", 20000), n_z = s.count("n_z", 20);
  auto c = lift(random_intersection(k, s.sub("faces")), orthonormal_rows(k, d, s.sub("basis")));
  auto ds = draw_dataset(SamplerSpec::iso_gaussian(d), LabelModel::flip_rate(c, eta), n, s.sub("data"));
  Dataset clean = ds;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < ds.y.size(); ++i) {
    clean.y[i] = eval(c, ds.X.row(static_cast<Eigen::Index>(i)).transpose());
    wrong += clean.y[i] != ds.y[i];
  }
  double err = static_cast<double>(wrong) / static_cast<double>(n);
  // same z draws per point for both terms, so the inequality holds draw by draw
  const std::uint64_t zs = s.sub("z");
  auto lhs = opt_sigma_term(c, ds, sigma, n_z, zs);
  auto sens = opt_sigma_term(c, clean, sigma, n_z, zs);
  s.add({{"k", k}, {"d", d}, {"eta", eta}, {"sigma", sigma}, {"err", err}, {"sensitivity", sens.estimate}},
        Check::Upper, lhs.estimate, std::hypot(lhs.std_error, sens.std_error), err + sens.estimate, lhs.n_samples,
        lhs.seed);
}

void suite_b11(Suite& s) {
  auto ks = s.ints("k", {1, 2, 3});
  double sigma = s.num("sigma", 0.02);
  double eps = s.num("eps", 3.0 * sigma);
  int d = s.integer("d", 6);
  auto n = s.count("n", 100000);
  const double M = normal_pdf(0.0);  // every unit direction of N(0, I)
  for (int k : ks) {
    auto c = lift(random_intersection(k, s.sub("faces/" + std::to_string(k))),
                  orthonormal_rows(k, d, s.sub("basis/" + std::to_string(k))));
    auto e = expected_sensitivity(c, SamplerSpec::iso_gaussian(d), sigma, n, 1, s.sub("mc/" + std::to_string(k)));
    s.add({{"k", k}, {"d", d}, {"sigma", sigma}, {"eps", eps}, {"M", M}}, Check::Upper, e,
          sensitivity_bound_b11(k, M, eps, sigma));
  }
}

void suite_b13(Suite& s) {
  auto ks = s.ints("k", {1, 3});
  double tau = s.num("tau", 0.5);
  auto sigmas = s.nums("sigma", {0.01, 0.02, 0.04});
  int d = s.integer("d", 8);
  auto n = s.count("n", 200000);
  double min_r2 = s.num("min_r2", 0.95);
  for (int k : ks) {
    Rng rng(s.sub("w/" + std::to_string(k)));
    auto core = make_halfspace(standard_normal(rng, k), 0.2);
    auto c = lift(core, orthonormal_rows(k, d, s.sub("basis/" + std::to_string(k))));
    auto data = SamplerSpec::smoothed(SamplerSpec::hypercube(d), tau);
    std::vector<double> ys;
    const std::uint64_t seed = s.sub("mc/" + std::to_string(k));
    for (double sigma : sigmas) {
      auto e = expected_sensitivity(c, data, sigma, n, 1, seed);
      ys.push_back(e.estimate);
      s.add({{"k", k}, {"tau", tau}, {"sigma", sigma}, {"kind", "sensitivity"}}, Check::Info, e, 0.0);
    }
    auto [slope, r2] = line_fit(sigmas, ys, true);
    s.add({{"k", k}, {"tau", tau}, {"kind", "r2"}, {"slope", slope}}, Check::AtLeast, r2, 0.0, min_r2, n, seed);
  }
}

void suite_b14(Suite& s) {
  auto taus = s.nums("tau", {0.5, 2.0});
  auto n = s.count("n", 100000);
  int dirs = s.integer("directions", 4);
  const std::vector<double> t_grid{0.5, 1.0, 2.0, 4.0};
  struct Base {
    std::string name;
    SamplerSpec spec;
    double alpha, lambda;
  };
  // N(0,1) tails: Phi(-t) <= 2 e^{-t^2/2}, i.e. (1, sqrt 2).
  std::vector<Base> bases{{"iso_gaussian", SamplerSpec::iso_gaussian(2), 1.0, std::numbers::sqrt2},
                          {"subexp", SamplerSpec::subexp(2, 0.5, 1.0), 0.5, 1.0}};
  for (const auto& b : bases)
    for (double tau : taus) {
      auto [a2, l2] = smoothed_tail_params(b.alpha, b.lambda, tau);
      auto rep = tail_check(SamplerSpec::smoothed(b.spec, tau), a2, l2, unit_rows(dirs, 2, s.sub("dirs")), t_grid, n,
                            s.sub(b.name + "/" + std::to_string(tau)));
      s.add_check({{"base", b.name}, {"tau", tau}, {"alpha", a2}, {"lambda", l2}}, rep);
    }
}

void suite_c2(Suite& s) {
  double a = s.num("a", 1.0);
  int m_max = s.integer("m_max", 40);
  double tol = s.num("tol", 1e-3);
  int first_max = s.integer("first_m_max", 30);
  // the quadrature bottoms out near 1e-16 and then moves by rounding only
  double roundoff = s.num("roundoff", 1e-12);
  double prev = 0.0;
  int first = m_max + 1;
  for (int m = 1; m <= m_max; ++m) {
    double e = exp_l1_error(a, m);
    s.add_exact({{"a", a}, {"m", m}, {"kind", "error"}}, Check::AtMost, e, m == 1 ? e : prev + roundoff);
    if (e <= tol && first > m_max) first = m;
    prev = e;
  }
  s.add_exact({{"a", a}, {"tol", tol}, {"kind", "first_m"}}, Check::AtMost, first, first_max);
}

void suite_c4(Suite& s) {
  auto us = s.nums("u", {0.0, 0.5, 1.0, 2.0});
  double rel = s.num("rel", 1e-6);
  for (double u : us) {
    // (N(x;u,1)/N(x;0,1))^2 = e^{2ux - u^2}
    double q = normal_expectation([u](double x) { return std::exp(2.0 * u * x - u * u); }, 200);
    double exact = std::exp(u * u);
    s.add_exact({{"u", u}}, Check::Match, q, exact, rel * exact);
  }
}

void suite_c5(Suite& s) {
  int instances = s.integer("instances", 20);
  Rng rng(s.sub("instances"));
  auto unif = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  for (int i = 0; i < instances; ++i) {
    int k = std::uniform_int_distribution<int>(1, 3)(rng);
    int l1 = std::uniform_int_distribution<int>(1, 4)(rng);
    int l2 = std::uniform_int_distribution<int>(1, 3)(rng);
    double t1 = unif(0.2, 2.0), t2 = unif(0.2, 2.0);
    std::vector<double> oc;
    for (int j = 0; j <= l1; ++j) oc.push_back(unif(-t1, t1));
    SparsePolynomial inner(k);
    for (const auto& e : monomial_basis(k, l2)) inner.add_term(e, unif(-t2, t2));
    auto p = compose(UnivariatePolynomial(oc), inner);
    json params = {{"instance", i}, {"k", k}, {"l1", l1}, {"l2", l2}, {"t1", t1}, {"t2", t2}};
    params["kind"] = "coefficients";
    s.add_exact(params, Check::AtMost, p.max_abs_coeff(), compose_coeff_bound(t1, t2, k, l1, l2));
    params["kind"] = "degree";
    s.add_exact(params, Check::AtMost, p.degree(), l1 * l2);
  }
}

void suite_c8(Suite& s) {
  int d = s.integer("d", 200), set = s.integer("set", 100), k = s.integer("k", 3);
  double eps = s.num("eps", 0.1), delta = s.num("delta", 0.1);
  int trials = s.integer("trials", 50);
  Matrix W = orthonormal_rows(k, d, s.sub("W"));
  Matrix S = unit_rows(set, d, s.sub("S"));
  int m = jl_dimension(1.0, 1.0, k, static_cast<std::size_t>(set), delta, eps);
  double prev = 1.0 - delta;
  for (int mult : {1, 2, 4}) {
    const std::uint64_t seed = s.sub("R" + std::to_string(mult));
    double rate = jl_check(W, S, mult * m, eps, trials, seed);
    double se = std::sqrt(rate * (1.0 - rate) / trials);
    s.add({{"m", mult * m}, {"multiple", mult}, {"d", d}, {"k", k}, {"eps", eps}, {"delta", delta}}, Check::AtLeast,
          rate, se, prev, static_cast<std::uint64_t>(trials), seed);
    prev = rate;
  }
}

void suite_c9(Suite& s) {
  auto bs = s.nums("b", {0.0, 0.5, 1.0});
  int d = s.integer("d", 10);
  double delta = s.num("delta", 0.01);
  auto n = s.count("n", 500000);
  Matrix U = orthonormal_rows(1, d, s.sub("basis"));
  for (double b : bs) {
    auto core = make_halfspace(Vector::Ones(1), b);
    auto lifted = lift(core, U);
    auto g1 = gsa_mc(core, delta, n, s.sub("core/" + std::to_string(b)));
    auto gd = gsa_mc(lifted, delta, n, s.sub("lifted/" + std::to_string(b)));
    double se = std::hypot(g1.at_delta.std_error, gd.at_delta.std_error);
    s.add({{"b", b}, {"d", d}, {"delta", delta}, {"core", g1.at_delta.estimate}}, Check::Match,
          gd.at_delta.estimate, se, g1.at_delta.estimate, n, gd.at_delta.seed,
          3.0 * se + gsa_bias_allowance(delta));
  }
}

void suite_c10(Suite& s) {
  int pairs = s.integer("pairs", 20);
  double max_step = s.num("max_step", 0.5);
  auto n = s.count("n", 20000);
  Rng rng(s.sub("pairs"));
  std::vector<std::pair<std::string, Concept>> cs{{"halfspace", make_halfspace(standard_normal(rng, 3), 0.5)},
                                                  {"intersection", random_intersection(3, s.sub("faces"))},
                                                  {"ball", make_ball(Vector::Zero(3), 1.5)}};
  for (const auto& [name, c] : cs)
    for (int i = 0; i < pairs; ++i) {
      Vector u = standard_normal(rng, 3) * 0.5;
      Vector v = u + standard_normal(rng, 3).normalized() * std::uniform_real_distribution<double>(0.0, max_step)(rng);
      auto e = translation_l1(c, u, v, n, derive_seed(s.sub("mc"), rng()));
      s.add({{"concept", name}, {"pair", i}, {"distance", (u - v).norm()}}, Check::Upper, e,
            translation_bound(c.gsa_ref, u, v));
    }
  // sign(z1) shifted by 0.3: E|f(z) - f(z + 0.3 e1)| = 2 (Phi(0) - Phi(-0.3))
  auto e = translation_l1(make_halfspace(unit(3, 0), 0.0), Vector::Zero(3), unit(3, 0) * 0.3, n * 10, s.sub("oracle"));
  s.add({{"concept", "halfspace"}, {"kind", "oracle"}, {"distance", 0.3}}, Check::Match, e,
        2.0 * (normal_cdf(0.0) - normal_cdf(-0.3)), 3.0 * e.std_error);
}

void suite_d4(Suite& s) {
  auto us = s.nums("u", {0.0, 1.0});
  auto n = s.count("n", 400000);
  auto integrand = [](double x, double u) {
    double r = normal_pdf(x - u) * 2.0 * std::exp(std::fabs(x));
    return std::pow(r, 4) * 0.5 * std::exp(-std::fabs(x));
  };
  double q0 = 0.0;
  for (double u : us) {
    double quad = simpson([&](double x) { return integrand(x, u); }, u - 12.0, u + 12.0, 240000);
    if (u == 0.0) q0 = quad;
    auto e = laplace_ratio_moment(Vector::Constant(1, u), n, s.sub("k1/" + std::to_string(u)));
    s.add({{"k", 1}, {"u", u}, {"kind", "quadrature"}}, Check::Match, e, quad, 3.0 * e.std_error);
  }
  if (q0 == 0.0) q0 = simpson([&](double x) { return integrand(x, 0.0); }, -12.0, 12.0, 240000);
  auto e2 = laplace_ratio_moment(Vector::Zero(2), n, s.sub("k2"));
  s.add({{"k", 2}, {"u", 0.0}, {"kind", "product"}}, Check::Match, e2, q0 * q0, 3.0 * e2.std_error);

  std::vector<double> xs, ys;
  for (double t : {0.0, 1.0, 2.0, 3.0}) {
    Vector u = Vector::Zero(3);
    u[0] = t;
    xs.push_back(t);
    ys.push_back(std::log(laplace_ratio_moment_exact(u)));
  }
  auto [slope, r2] = line_fit(xs, ys, false);
  s.add_exact({{"k", 3}, {"kind", "loglinear_r2"}, {"slope", slope}}, Check::AtLeast, r2, s.num("min_r2", 0.99));
  s.add_exact({{"k", 3}, {"kind", "loglinear_slope"}}, Check::AtMost, slope, s.num("max_slope", 4.0));
}

void suite_d5(Suite& s) {
  auto ks = s.ints("k", {1, 2, 3});
  auto lambdas = s.nums("lambda", {0.5, 1.0});
  double alpha = s.num("alpha", 0.5);
  auto n = s.count("n", 100000);
  for (int k : ks)
    for (double lambda : lambdas) {
      double b = 0.5 / lambda;
      auto e = l1_mgf(SamplerSpec::subexp(k, alpha, lambda), b, n, s.sub(std::to_string(k) + "/" + std::to_string(lambda)));
      json p = {{"k", k}, {"lambda", lambda}, {"alpha", alpha}, {"b", b}};
      p["kind"] = "mgf";
      s.add(p, Check::Info, e, 0.0);
      p["kind"] = "relative_se";
      s.add(p, Check::AtMost, e.std_error / e.estimate, 0.0, 0.1, e.n_samples, e.seed);
    }
}

void suite_d6(Suite& s) {
  auto ks = s.ints("k", {1, 2, 4});
  auto Ts = s.nums("T", {4.0, 8.0, 16.0});
  auto n = s.count("n", 200000);
  for (int k : ks)
    for (double T : Ts) {
      auto e = norm_tail(SamplerSpec::laplace_q(k), T, n, s.sub(std::to_string(k) + "/" + std::to_string(T)));
      s.add({{"k", k}, {"T", T}}, Check::Upper, e, laplace_norm_tail_bound(k, T));
    }
}

// ---- named suites ----

void suite_gsa(Suite& s) {
  double delta = s.num("delta", 0.01);
  auto n = s.count("n", 1000000);
  double max_shift = s.num("max_shift", 0.02);
  std::vector<std::tuple<std::string, Concept, double>> cases{
      {"halfspace_b0", make_halfspace(Vector::Ones(1), 0.0), phi(0.0)},
      {"halfspace_b1", make_halfspace(Vector::Ones(1), 1.0), phi(1.0)},
      {"quadrant", make_intersection({{unit(2, 0), 0.0}, {unit(2, 1), 0.0}}, 2), phi(0.0) * 2.0 * normal_cdf(0.0)}};
  for (const auto& [name, c, target] : cases) {
    auto g = gsa_mc(c, delta, n, s.sub(name));
    s.add({{"case", name}, {"delta", delta}, {"kind", "value"}}, Check::Match, g.at_delta, target,
          3.0 * g.at_delta.std_error + gsa_bias_allowance(delta));
    // the half shell is nested in the full one, so E[(a - b)^2] = at_delta / delta per draw
    double shift = g.shift();
    double var = std::max(0.0, g.at_delta.estimate / delta - shift * shift);
    double se = std::sqrt(var / static_cast<double>(n));
    double scale = g.at_delta.estimate;
    s.add({{"case", name}, {"delta", delta}, {"kind", "half_delta_shift"}, {"shift", shift}}, Check::Upper,
          std::fabs(shift) / scale, se / scale, max_shift, n, g.at_delta.seed);
  }
}

void suite_sensitivity(Suite& s) {
  int d = s.integer("d", 3);
  double sigma = s.num("sigma", 0.2);
  auto ratios = s.nums("ratio", {1.0, 2.0, 3.0});
  auto n = s.count("n", 1000000);
  Rng rng(s.sub("w"));
  Vector w = standard_normal(rng, d).normalized();
  auto c = make_halfspace(w, 0.0);
  for (double r : ratios) {
    Vector x = w * (r * sigma);
    auto e = sensitivity(c, x, sigma, n, s.sub("mc/" + std::to_string(r)));
    s.add({{"ratio", r}, {"sigma", sigma}, {"d", d}}, Check::Match, e, normal_cdf(-r), 3.0 * e.std_error);
  }
}

void suite_tail(Suite& s) {
  auto n = s.count("n", 100000);
  int dirs = s.integer("directions", 5);
  auto g = tail_check(SamplerSpec::iso_gaussian(3), 1.0, 2.0, unit_rows(dirs, 3, s.sub("dirs")), {1.0, 2.0, 3.0}, n,
                      s.sub("iso_gaussian"));
  s.add_check({{"spec", "iso_gaussian"}, {"alpha", 1.0}, {"lambda", 2.0}}, g);
  for (double alpha : s.nums("alpha", {0.25, 0.5, 1.0}))
    for (double lambda : s.nums("lambda", {0.5, 1.0, 2.0})) {
      auto rep = tail_check(SamplerSpec::subexp(3, alpha, lambda), alpha, lambda, unit_rows(dirs, 3, s.sub("dirs")),
                            {0.5 * lambda, lambda, 2.0 * lambda, 3.0 * lambda}, n,
                            s.sub("subexp/" + std::to_string(alpha) + "/" + std::to_string(lambda)));
      s.add_check({{"spec", "subexp"}, {"alpha", alpha}, {"lambda", lambda}}, rep);
    }
}

void suite_l1_oracle(Suite& s) {
  int instances = s.integer("instances", 200);
  int grid = s.integer("grid", 10000);
  {
    Rng rng(s.sub("irls"));
    for (int inst = 0; inst < instances; ++inst) {
      int n = std::uniform_int_distribution<int>(3, 10)(rng);
      int cols = std::uniform_int_distribution<int>(1, 3)(rng);
      Matrix Phi(n, cols);
      Phi.col(0).setOnes();
      for (int j = 1; j < cols; ++j)
        for (int i = 0; i < n; ++i) Phi(i, j) = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
      Vector y(n);
      for (int i = 0; i < n; ++i) y[i] = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
      auto ex = l1_fit_exact_small(Phi, y);
      auto ir = l1_fit_irls(Phi, y);
      s.add_exact({{"kind", "irls"}, {"instance", inst}, {"rows", n}, {"cols", cols}}, Check::Match, ir.objective,
                  ex.objective, 1e-5 * (1.0 + ex.objective));
    }
  }
  Rng rng(s.sub("threshold"));
  for (int inst = 0; inst < instances; ++inst) {
    int n = std::uniform_int_distribution<int>(1, 50)(rng);
    Vector sc(n);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      sc[i] = inst % 4 == 0 ? std::round(std::uniform_real_distribution<double>(-2.0, 2.0)(rng) * 4.0) / 4.0
                            : std::uniform_real_distribution<double>(-1.5, 1.5)(rng);
      y[static_cast<std::size_t>(i)] = std::bernoulli_distribution(0.5)(rng) ? 1 : -1;
    }
    auto got = threshold_select(sc, y);
    std::size_t best = static_cast<std::size_t>(n);
    for (int g = 0; g < grid; ++g) best = std::min(best, threshold_errors(sc, y, -1.0 + 2.0 * g / (grid - 1.0)));
    s.add_exact({{"kind", "threshold"}, {"instance", inst}, {"points", n}}, Check::AtMost,
                static_cast<double>(got.errors), static_cast<double>(best));
  }
}

void suite_pz_bounded(Suite& s) {
  double rho = s.num("rho", 0.3);
  int m = s.integer("m", 12);
  auto n_s = s.count("n_s", 100000);
  int nz = s.integer("z_draws", 20), grid = s.integer("grid", 2000);
  double max_gap = s.num("max_gap", 0.05);
  auto c = make_halfspace(Vector::Ones(1), 0.0);
  auto zs = z_draws(s.sub("z"), nz);
  const std::uint64_t build = s.sub("s");
  auto gap_at = [&](int mm) {
    std::vector<double> per_z;
    for (int i = 0; i < nz; ++i) {
      auto p = build_pz_bounded(c, rho, mm, Vector::Constant(1, zs[static_cast<std::size_t>(i)]), n_s,
                                derive_seed(build, static_cast<std::uint64_t>(i)));
      double g = 0.0;
      for (int j = 0; j < grid; ++j) {
        double x = -1.0 + (j + 0.5) * 2.0 / grid;
        g += std::fabs(p.eval(std::vector<double>{x}) - ou_sign_oracle(zs[static_cast<std::size_t>(i)], x, rho));
      }
      per_z.push_back(g / grid);
    }
    return mean_and_se(per_z);
  };
  Gap full = gap_at(m), half = gap_at(m / 2);
  const auto n = static_cast<std::uint64_t>(n_s);
  s.add({{"rho", rho}, {"m", m}, {"kind", "gap"}}, Check::Upper, full.mean, full.se, max_gap, n, build);
  s.add({{"rho", rho}, {"m", m / 2}, {"kind", "half_m_worse"}}, Check::Exceeds, half.mean,
        std::hypot(half.se, full.se), full.mean, n, build);
}

void suite_pz_subexp(Suite& s) {
  double rho = s.num("rho", 0.5);
  int m = s.integer("m", 10);
  double T = s.num("T", 6.0);
  auto n_s = s.count("n_s", 100000);
  int nz = s.integer("z_draws", 20), grid = s.integer("grid", 2001);
  double cheb_T = s.num("cheb_T", 8.0), cheb_eps = s.num("cheb_eps", 1e-8);
  auto c = make_halfspace(Vector::Ones(1), 0.0);
  auto p1 = cheb_exp_neg(cheb_T, cheb_eps);
  auto zs = z_draws(s.sub("z"), nz);
  const std::uint64_t build = s.sub("s");
  // Laplace(1)-weighted L1 gap on [-2, 2]
  auto gap_at = [&](int mm) {
    std::vector<double> per_z;
    for (int i = 0; i < nz; ++i) {
      double z = zs[static_cast<std::size_t>(i)];
      auto p = build_pz_subexp(c, rho, p1, mm, T, Vector::Constant(1, z), n_s,
                               derive_seed(build, static_cast<std::uint64_t>(i)));
      double g = 0.0, wsum = 0.0;
      for (int j = 0; j < grid; ++j) {
        double u = -2.0 + j * 4.0 / (grid - 1), w = std::exp(-std::fabs(u));
        g += w * std::fabs(p.poly.eval(std::vector<double>{u}) - ou_sign_oracle(z, u, rho));
        wsum += w;
      }
      per_z.push_back(g / wsum);
    }
    return mean_and_se(per_z);
  };
  Gap lo = gap_at(m), hi = gap_at(2 * m);
  const auto n = static_cast<std::uint64_t>(n_s);
  s.add({{"rho", rho}, {"m", m}, {"T", T}, {"kind", "gap"}}, Check::Info, lo.mean, lo.se, 0.0, n, build);
  s.add({{"rho", rho}, {"m", 2 * m}, {"T", T}, {"kind", "gap_doubled_m"}, {"p1_degree", p1.degree()}}, Check::Below,
        hi.mean, std::hypot(lo.se, hi.se), lo.mean, n, build);
}

struct Entry {
  std::string id;
  std::function<void(Suite&)> run;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r{
      {"3.4", suite_34},       {"B.5", suite_b5},   {"B.6", suite_b6},   {"B.9", suite_b9},
      {"B.11", suite_b11},     {"B.13", suite_b13}, {"B.14", suite_b14}, {"C.2", suite_c2},
      {"C.4", suite_c4},       {"C.5", suite_c5},   {"C.8", suite_c8},   {"C.9", suite_c9},
      {"C.10", suite_c10},     {"D.4", suite_d4},   {"D.5", suite_d5},   {"D.6", suite_d6},
      {"gsa", suite_gsa},      {"sensitivity", suite_sensitivity},       {"tail", suite_tail},
      {"l1-oracle", suite_l1_oracle},               {"pz-bounded", suite_pz_bounded},
      {"pz-subexp", suite_pz_subexp}};
  return r;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

const std::vector<std::string>& suite_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& e : registry()) v.push_back(e.id);
    return v;
  }();
  return ids;
}

bool has_suite(const std::string& id) {
  const auto& ids = suite_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

RunReport cmd_verify(const std::string& id, const nlohmann::json& params, std::uint64_t seed) {
  auto it = std::find_if(registry().begin(), registry().end(), [&](const Entry& e) { return e.id == id; });
  if (it == registry().end()) {
    std::string list;
    for (const auto& s : suite_ids()) list += (list.empty() ? "" : ", ") + s;
    throw ConfigError("unknown suite id '" + id + "'; available: " + list);
  }
  const nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;
  if (!p.is_object()) throw ConfigError("verify " + id + ": parameters must be an object");
  auto t0 = std::chrono::steady_clock::now();
  Suite s(id, p, seed);
  it->run(s);
  for (const auto& [k, v] : p.items())
    if (!s.used().contains(k)) {
      std::string accepted;
      for (const auto& [a, _] : s.used().items()) accepted += (accepted.empty() ? "" : ", ") + a;
      throw ConfigError("verify " + id + ": unknown parameter '" + k + "'; accepted: " + accepted);
    }
  RunReport r;
  r.command = "verify";
  r.config = {{"id", id}, {"params", s.used()}, {"seed", seed}};
  r.metrics = s.take();
  r.wall_seconds = seconds_since(t0);
  return r;
}

RunReport cmd_sq_parity(int k, double sigma, std::size_t n, std::uint64_t seed) {
  if (k < 1) throw ConfigError("sq-parity: k must be >= 1");
  if (!(sigma >= 0.0)) throw ConfigError("sq-parity: sigma must be >= 0");
  if (n < 1) throw ConfigError("sq-parity: n must be >= 1");
  auto t0 = std::chrono::steady_clock::now();
  std::vector<int> coords(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) coords[static_cast<std::size_t>(i)] = i;
  auto c = make_parity(k, coords);
  const std::uint64_t mc = derive_seed(seed, "sq-parity");
  auto e = expected_sensitivity(c, SamplerSpec::hypercube(k), sigma, n, 1, mc);
  RunReport r;
  r.command = "sq-parity";
  r.config = {{"k", k}, {"sigma", sigma}, {"n", n}, {"seed", seed}};
  // each coordinate of a +-1 point flips sign with probability Phi(-1/sigma)
  double bound = sigma > 0.0 ? k * normal_cdf(-1.0 / sigma) : 0.0;
  r.metrics.push_back(judge("sq-parity", {{"k", k}, {"sigma", sigma}}, Check::Upper, e.estimate, e.std_error, bound,
                            e.n_samples, e.seed));
  r.wall_seconds = seconds_since(t0);
  return r;
}

}  // namespace smoothlab
