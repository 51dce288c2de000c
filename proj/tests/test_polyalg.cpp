#include "doctest.h"

#include "smoothlab/core.hpp"
#include "smoothlab/polynomial.hpp"
#include "smoothlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>

using namespace smoothlab;

namespace {

double ev(const SparsePolynomial& p, std::vector<double> x) { return p.eval(std::span<const double>(x)); }

// Composite Simpson on [lo, hi] with n (even) panels.
template <class F>
double simpson(F f, double lo, double hi, int n) {
  double h = (hi - lo) / n, s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

using Terms = std::map<Exponents, double>;

Terms as_terms(const SparsePolynomial& p) {
  Terms t;
  for (const auto& [e, c] : p.terms()) t[e] = c;
  return t;
}

// Schoolbook product on plain maps, dropping exact zeros.
Terms brute_mul(const Terms& a, const Terms& b) {
  Terms r;
  for (const auto& [ea, ca] : a)
    for (const auto& [eb, cb] : b) {
      Exponents e(ea.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      r[e] += ca * cb;
    }
  for (auto it = r.begin(); it != r.end();) it = it->second == 0.0 ? r.erase(it) : std::next(it);
  return r;
}

Terms brute_add(Terms a, const Terms& b) {
  for (const auto& [e, c] : b) a[e] += c;
  for (auto it = a.begin(); it != a.end();) it = it->second == 0.0 ? a.erase(it) : std::next(it);
  return a;
}

Terms one(int n) { return {{Exponents(static_cast<std::size_t>(n), 0), 1.0}}; }

// Integer coefficients keep every product exact in double.
SparsePolynomial random_int_poly(std::mt19937_64& rng, int n, int max_deg, int max_terms) {
  std::uniform_int_distribution<int> nt(1, max_terms), ex(0, max_deg), co(-3, 3);
  SparsePolynomial p(n);
  int terms = nt(rng);
  for (int t = 0; t < terms; ++t) {
    Exponents e(static_cast<std::size_t>(n), 0);
    int budget = ex(rng);
    for (int b = 0; b < budget; ++b) e[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, n - 1)(rng))]++;
    p.add_term(e, co(rng));
  }
  return p;
}

}  // namespace

TEST_CASE("eval examples") {
  CHECK(ev(SparsePolynomial::constant(2, 1.0), {4.0, -7.0}) == 1.0);
  SparsePolynomial xy(2);
  xy.add_term({1, 1}, 1.0);
  CHECK(ev(xy, {2.0, 3.0}) == 6.0);
  SparsePolynomial sq(2);
  sq.add_term({2, 0}, 1.0);
  sq.add_term({1, 1}, 2.0);
  sq.add_term({0, 2}, 1.0);
  CHECK(ev(sq, {1.0, 1.0}) == 4.0);
  CHECK_THROWS_AS(ev(sq, {1.0}), std::invalid_argument);
}

TEST_CASE("sparse polynomial invariants") {
  SparsePolynomial p(2);
  p.add_term({1, 0}, 2.0);
  p.add_term({1, 0}, -2.0);
  CHECK(p.is_zero());
  CHECK(p.degree() <= 0);
  CHECK_THROWS(p.add_term({1}, 1.0));
  CHECK_THROWS(p.add_term({-1, 0}, 1.0));
  p.add_term({0, 3}, 1.5);
  p.add_term({1, 1}, -1.0);
  CHECK(p.degree() == 3);
  CHECK(p.max_abs_coeff() == 1.5);
  CHECK(p.sum_abs_coeff() == 2.5);
  CHECK_THROWS((void)(SparsePolynomial(2) + SparsePolynomial(3)));
}

TEST_CASE("monomial basis") {
  auto b12 = monomial_basis(1, 2);
  REQUIRE(b12.size() == 3);
  CHECK(b12[0] == Exponents{0});
  CHECK(b12[1] == Exponents{1});
  CHECK(b12[2] == Exponents{2});

  auto b21 = monomial_basis(2, 1);
  REQUIRE(b21.size() == 3);
  CHECK(b21[1] == Exponents{1, 0});
  CHECK(b21[2] == Exponents{0, 1});

  CHECK(monomial_basis(3, 4).size() == 35);
  CHECK(monomial_count(12, 4) == 1820);

  auto b22 = monomial_basis(2, 2);
  std::vector<Exponents> want{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  CHECK(b22 == want);

  SUBCASE("count matches binomial and order is strict graded-lex") {
    for (int n = 1; n <= 5; ++n)
      for (int d = 0; d <= 5; ++d) {
        auto b = monomial_basis(n, d);
        double binom = std::round(std::tgamma(n + d + 1.0) / (std::tgamma(n + 1.0) * std::tgamma(d + 1.0)));
        CHECK(static_cast<double>(b.size()) == binom);
        for (std::size_t i = 1; i < b.size(); ++i) CHECK(GradedLex{}(b[i - 1], b[i]));
      }
  }

  CHECK_THROWS_AS(monomial_basis(40, 8, 1000), TermCapExceeded);
  CHECK_THROWS(monomial_basis(2, -1));
}

TEST_CASE("eval_monomials agrees with direct powers") {
  auto b = monomial_basis(3, 3);
  auto parents = monomial_parents(b);
  std::vector<double> x{0.7, -1.3, 2.1}, out(b.size());
  eval_monomials(parents, x.data(), out.data());
  for (std::size_t i = 0; i < b.size(); ++i) {
    double want = std::pow(x[0], b[i][0]) * std::pow(x[1], b[i][1]) * std::pow(x[2], b[i][2]);
    CHECK(out[i] == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("taylor_exp") {
  CHECK(taylor_exp(1).coeffs() == std::vector<double>{1.0});
  auto q3 = taylor_exp(3);
  REQUIRE(q3.degree() == 2);
  CHECK(q3.coeffs()[1] == 1.0);
  CHECK(q3.coeffs()[2] == 0.5);

  long double partial = 0, fact = 1;
  for (int i = 0; i < 10; ++i) {
    if (i > 0) fact *= i;
    partial += 1.0L / fact;
  }
  double gap = static_cast<double>(std::exp(1.0L) - partial);
  CHECK(gap == doctest::Approx(3.03e-7).epsilon(0.01));
  CHECK(std::fabs(std::exp(1.0) - taylor_exp(10)(1.0)) == doctest::Approx(gap).epsilon(1e-6));

  auto q30 = taylor_exp(30);
  CHECK(q30.degree() == 29);
  CHECK(q30.coeffs()[29] == doctest::Approx(1.0 / std::tgamma(30.0)).epsilon(1e-13));
  CHECK_THROWS(taylor_exp(0));
}

TEST_CASE("Taylor polynomials are dominated by exp(|x|)") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int m : {1, 2, 5, 10, 20, 40}) {
    auto q = taylor_exp(m + 1);
    for (int i = 0; i < 1000; ++i) {
      double x = u(rng);
      CHECK(std::fabs(q(x)) <= std::exp(std::fabs(x)) * (1 + 1e-15));
    }
  }
}

TEST_CASE("Gauss-Hermite rule") {
  const auto& r = gauss_hermite_normal(200);
  REQUIRE(r.nodes.size() == 200);
  double wsum = 0;
  for (double w : r.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));
  // normal moments: E Z^2 = 1, E Z^4 = 3, E Z^6 = 15
  CHECK(normal_expectation([](double z) { return z * z; }) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(normal_expectation([](double z) { return std::pow(z, 4); }) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(normal_expectation([](double z) { return std::pow(z, 6); }) == doctest::Approx(15.0).epsilon(1e-12));
  // E cos(Z) = e^{-1/2} against Simpson
  double simp = simpson([](double z) { return std::cos(z) * normal_pdf(z); }, -14.0, 14.0, 20000);
  CHECK(normal_expectation([](double z) { return std::cos(z); }) == doctest::Approx(simp).epsilon(1e-12));
  CHECK(simp == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("Gaussian likelihood ratio second moment is e^{u^2}") {
  for (double u : {0.0, 0.5, 1.0, 2.0}) {
    double v = normal_expectation([u](double x) {
      double ratio = normal_pdf(x - u) / normal_pdf(x);
      return ratio * ratio;
    });
    CHECK(v == doctest::Approx(std::exp(u * u)).epsilon(1e-6));
  }
}

TEST_CASE("exp_l1_error") {
  for (int m : {1, 3, 8}) CHECK(exp_l1_error(0.0, m) == 0.0);
  CHECK_THROWS(exp_l1_error(-0.1, 3));

  // a = 1, m = 2: E|e^{-1/2+t} - (1/2 + t)| by Simpson on a wide grid
  double simp = simpson([](double t) { return std::fabs(std::exp(-0.5 + t) - (0.5 + t)) * normal_pdf(t); }, -14.0,
                        14.0, 200000);
  CHECK(exp_l1_error(1.0, 2) == doctest::Approx(simp).epsilon(1e-8));

  SUBCASE("smallest m reaching 1e-3 for a = 1") {
    int first = 0;
    for (int m = 1; m <= 40 && !first; ++m)
      if (exp_l1_error(1.0, m) <= 1e-3) first = m;
    CHECK(first >= 1);
    CHECK(first <= 30);
    CHECK(first == 10);
  }

  SUBCASE("non-increasing in m for a in {0.5, 1}") {
    for (double a : {0.5, 1.0}) {
      double prev = exp_l1_error(a, 1);
      for (int m = 2; m <= 40; ++m) {
        double cur = exp_l1_error(a, m);
        CHECK(cur <= prev + 1e-10);
        prev = cur;
      }
    }
  }

  SUBCASE("a = 2 rises until m = 5, then decreases") {
    // y ~ N(-2, 4) puts mass at large negative y, where |q_m(y)| ~ |y|^{m-1}/(m-1)!
    // grows with m before the factorial wins.
    for (int m = 1; m < 5; ++m) CHECK(exp_l1_error(2.0, m + 1) > exp_l1_error(2.0, m));
    double prev = exp_l1_error(2.0, 5);
    for (int m = 6; m <= 60; ++m) {
      double cur = exp_l1_error(2.0, m);
      CHECK(cur <= prev + 1e-10);
      prev = cur;
    }
    CHECK(prev <= 1e-10);
  }
}

TEST_CASE("compose examples") {
  SparsePolynomial s = SparsePolynomial::variable(2, 0) + SparsePolynomial::variable(2, 1);
  auto sq = compose(UnivariatePolynomial({0.0, 0.0, 1.0}), s);
  CHECK(sq.coeff({2, 0}) == 1.0);
  CHECK(sq.coeff({1, 1}) == 2.0);
  CHECK(sq.coeff({0, 2}) == 1.0);
  CHECK(sq.size() == 3);
  CHECK(sq.max_abs_coeff() == 2.0);

  std::mt19937_64 rng(3);
  auto p = random_int_poly(rng, 3, 3, 5);
  auto onep = compose(UnivariatePolynomial({1.0, 1.0}), p);
  CHECK(as_terms(onep) == as_terms(SparsePolynomial::constant(3, 1.0) + p));

  auto t3 = compose(taylor_exp(3), SparsePolynomial::variable(1, 0));
  CHECK(t3.coeff({0}) == 1.0);
  CHECK(t3.coeff({1}) == 1.0);
  CHECK(t3.coeff({2}) == 0.5);
  CHECK(t3.size() == 3);

  CHECK(compose(UnivariatePolynomial(), p).is_zero());
}

TEST_CASE("poly_power examples") {
  SparsePolynomial x1 = SparsePolynomial::variable(2, 0), x2 = SparsePolynomial::variable(2, 1);
  auto p0 = poly_power(x1 + x2, 0);
  CHECK(p0.size() == 1);
  CHECK(p0.coeff({0, 0}) == 1.0);
  CHECK(poly_power(x1 + x2, 2).max_abs_coeff() == 2.0);
  auto cube = poly_power(SparsePolynomial::constant(2, 1.0) + x1 + x2, 3);
  CHECK(cube.coeff({1, 1}) == 6.0);
  CHECK(cube.coeff({0, 0}) == 1.0);
  CHECK(cube.coeff({2, 1}) == 3.0);
  CHECK_THROWS(poly_power(x1, -1));
}

TEST_CASE("compose and poly_power equal a schoolbook oracle exactly") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    int n = std::uniform_int_distribution<int>(1, 3)(rng);
    auto inner = random_int_poly(rng, n, 3, 6);
    int m = std::uniform_int_distribution<int>(0, 3)(rng);

    Terms pw = one(n);
    for (int i = 0; i < m; ++i) pw = brute_mul(pw, as_terms(inner));
    CHECK(as_terms(poly_power(inner, m)) == pw);

    int deg = std::uniform_int_distribution<int>(0, 3)(rng);
    std::vector<double> oc(static_cast<std::size_t>(deg) + 1);
    for (auto& c : oc) c = std::uniform_int_distribution<int>(-3, 3)(rng);
    UnivariatePolynomial outer(oc);
    Terms want, power = one(n);
    for (double c : outer.coeffs()) {
      Terms scaled = power;
      for (auto& [e, v] : scaled) v *= c;
      want = brute_add(want, scaled);
      power = brute_mul(power, as_terms(inner));
    }
    CHECK(as_terms(compose(outer, inner)) == want);
  }
}

TEST_CASE("compose evaluates as nested evaluation") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    int n = std::uniform_int_distribution<int>(1, 3)(rng);
    SparsePolynomial inner(n);
    for (const auto& e : monomial_basis(n, 2)) inner.add_term(e, u(rng));
    std::vector<double> oc(5);
    for (auto& c : oc) c = u(rng);
    UnivariatePolynomial outer(oc);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = u(rng);
    double g = inner.eval(std::span<const double>(x));
    double want = outer(g);
    double got = compose(outer, inner).eval(std::span<const double>(x));
    // scale: the same expression with absolute values everywhere
    double ga = 0;
    for (const auto& [e, c] : inner.terms()) {
      double t = std::fabs(c);
      for (int i = 0; i < n; ++i) t *= std::pow(std::fabs(x[static_cast<std::size_t>(i)]), e[static_cast<std::size_t>(i)]);
      ga += t;
    }
    double scale = 0;
    for (std::size_t i = 0; i < oc.size(); ++i) scale += std::fabs(oc[i]) * std::pow(ga, static_cast<double>(i));
    CHECK(std::fabs(got - want) <= 1e-12 * std::max(1.0, scale));
  }
}

TEST_CASE("coefficient bounds hold with the documented constant") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    int n = std::uniform_int_distribution<int>(1, 3)(rng);
    auto p = random_int_poly(rng, n, 3, 6);
    if (p.is_zero() || p.degree() < 1) continue;
    int m = std::uniform_int_distribution<int>(0, 4)(rng);
    CHECK(poly_power(p, m).max_abs_coeff() <= power_coeff_bound(p.max_abs_coeff(), n, p.degree(), m));

    int deg = std::uniform_int_distribution<int>(1, 4)(rng);
    std::vector<double> oc(static_cast<std::size_t>(deg) + 1);
    for (auto& c : oc) c = std::uniform_int_distribution<int>(-3, 3)(rng);
    oc.back() = 1.0;
    UnivariatePolynomial outer(oc);
    double t1 = 0;
    for (double c : oc) t1 = std::max(t1, std::fabs(c));
    auto comp = compose(outer, p);
    CHECK(comp.degree() <= outer.degree() * p.degree());
    CHECK(comp.max_abs_coeff() <= compose_coeff_bound(t1, p.max_abs_coeff(), n, outer.degree(), p.degree()));
  }
  // the q(x,s) inner map used for p_z: -|x|^2/(2 rho^2) + (x/rho).s
  double rho = 0.3;
  SparsePolynomial inner(2);
  inner.add_term({2, 0}, -0.5 / (rho * rho));
  inner.add_term({0, 2}, -0.5 / (rho * rho));
  inner.add_term({1, 0}, 0.7 / rho);
  inner.add_term({0, 1}, -1.1 / rho);
  auto q = compose(taylor_exp(8), inner);
  CHECK(q.max_abs_coeff() <= compose_coeff_bound(1.0, inner.max_abs_coeff(), 2, 7, 2));
}

TEST_CASE("term cap") {
  auto s = SparsePolynomial::constant(6, 1.0);
  for (int i = 0; i < 6; ++i) s += SparsePolynomial::variable(6, i);
  CHECK_THROWS_AS(poly_power(s, 6, 100), TermCapExceeded);
  CHECK_THROWS_AS(compose(taylor_exp(7), s, 100), TermCapExceeded);
  CHECK_NOTHROW(poly_power(s, 2, 100));
}

TEST_CASE("affine_substitute") {
  SparsePolynomial p(2);
  p.add_term({2, 1}, 1.5);
  p.add_term({0, 1}, -2.0);
  std::vector<double> shift{0.3, -0.4};
  auto q = affine_substitute(p, 2.0, shift);
  std::vector<double> x{0.9, -1.7};
  std::vector<double> y{2.0 * x[0] + shift[0], 2.0 * x[1] + shift[1]};
  CHECK(q.eval(std::span<const double>(x)) == doctest::Approx(p.eval(std::span<const double>(y))).epsilon(1e-13));
}

TEST_CASE("cheb_exp_neg") {
  for (double eps : {1e-2, 1e-4, 1e-8}) {
    auto p = cheb_exp_neg(5.0, eps);
    CHECK(std::fabs(p(0.0) - 1.0) <= eps);
  }

  auto p20 = cheb_exp_neg(20.0, 1e-4);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    double x = 20.0 * i / 9999.0;
    worst = std::max(worst, std::fabs(p20(x) - std::exp(-x)));
  }
  CHECK(worst <= 1e-4);

  SUBCASE("no worse than a Taylor sweep at the same tolerance") {
    auto p1 = cheb_exp_neg(1.0, 1e-2);
    int taylor_deg = -1;
    for (int m = 1; m <= 40 && taylor_deg < 0; ++m) {
      auto q = taylor_exp(m);
      double w = 0;
      for (int i = 0; i <= 10000; ++i) {
        double x = i / 10000.0;
        w = std::max(w, std::fabs(q(-x) - std::exp(-x)));
      }
      if (w <= 1e-2) taylor_deg = q.degree();
    }
    REQUIRE(taylor_deg >= 0);
    CHECK(p1.degree() <= taylor_deg);
  }

  SUBCASE("degree stays within the documented sqrt law") {
    for (double T : {0.5, 1.0, 4.0, 20.0})
      for (double eps : {1e-2, 1e-4, 1e-8}) {
        auto p = cheb_exp_neg(T, eps);
        double L = std::log(1.0 / eps);
        CHECK(p.degree() <= kChebDegreeConstant * std::sqrt(std::max(T, L) * L));
        CHECK(cheb_sup_error(p, T) <= eps);
      }
  }

  CHECK_THROWS(cheb_exp_neg(1.0, 0.0));
  CHECK_THROWS(cheb_exp_neg(1.0, 1.0));
  CHECK_THROWS(cheb_exp_neg(0.0, 0.1));
  CHECK_THROWS_AS(cheb_exp_neg(200.0, 1e-6), std::runtime_error);
}

TEST_CASE("polynomial json round trip") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SparsePolynomial p(3);
  for (const auto& e : monomial_basis(3, 3)) p.add_term(e, u(rng) / 3.0);
  auto j = to_json(p);
  CHECK(j["n_vars"] == 3);
  REQUIRE(j["terms"].size() == p.size());
  CHECK(j["terms"][0]["exps"] == std::vector<int>{0, 0, 0});
  auto back = polynomial_from_json(nlohmann::json::parse(j.dump()));
  CHECK(as_terms(back) == as_terms(p));
  CHECK_THROWS(polynomial_from_json(nlohmann::json::parse(R"({"n_vars":2,"terms":[{"exps":[1],"coeff":1}]})")));
}
