#include "smoothlab/polynomial.hpp"

#include "smoothlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

namespace smoothlab {

namespace {

int total_degree(const Exponents& e) { return std::accumulate(e.begin(), e.end(), 0); }

void check_vars(int a, int b) {
  if (a != b) throw std::invalid_argument("polynomial variable counts differ");
}

}  // namespace

bool GradedLex::operator()(const Exponents& a, const Exponents& b) const {
  int da = total_degree(a), db = total_degree(b);
  if (da != db) return da < db;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

SparsePolynomial::SparsePolynomial(int n_vars) : n_vars_(n_vars) {
  if (n_vars < 0) throw std::invalid_argument("n_vars must be >= 0");
}

SparsePolynomial SparsePolynomial::constant(int n_vars, double c) {
  SparsePolynomial p(n_vars);
  p.add_term(Exponents(n_vars, 0), c);
  return p;
}

SparsePolynomial SparsePolynomial::variable(int n_vars, int index, double coeff) {
  if (index < 0 || index >= n_vars) throw std::out_of_range("variable index");
  SparsePolynomial p(n_vars);
  Exponents e(n_vars, 0);
  e[index] = 1;
  p.add_term(e, coeff);
  return p;
}

int SparsePolynomial::degree() const {
  if (terms_.empty()) return -1;
  return total_degree(terms_.rbegin()->first);
}

double SparsePolynomial::coeff(const Exponents& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

void SparsePolynomial::add_term(const Exponents& e, double c) {
  if (static_cast<int>(e.size()) != n_vars_)
    throw std::invalid_argument("exponent vector has wrong length");
  for (int v : e)
    if (v < 0) throw std::invalid_argument("negative exponent");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double SparsePolynomial::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_vars_)
    throw std::invalid_argument("eval: point dimension " + std::to_string(x.size()) +
                                " != n_vars " + std::to_string(n_vars_));
  double s = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (int i = 0; i < n_vars_; ++i)
      for (int k = 0; k < e[i]; ++k) t *= x[i];
    s += t;
  }
  return s;
}

double SparsePolynomial::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::fabs(c));
  return m;
}

double SparsePolynomial::sum_abs_coeff() const {
  double m = 0.0;
  for (const auto& [e, c] : terms_) m += std::fabs(c);
  return m;
}

SparsePolynomial& SparsePolynomial::operator+=(const SparsePolynomial& o) {
  check_vars(n_vars_, o.n_vars_);
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

SparsePolynomial& SparsePolynomial::operator-=(const SparsePolynomial& o) {
  check_vars(n_vars_, o.n_vars_);
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

SparsePolynomial& SparsePolynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= s;
    it = it->second == 0.0 ? terms_.erase(it) : std::next(it);
  }
  return *this;
}

SparsePolynomial operator+(SparsePolynomial a, const SparsePolynomial& b) { return a += b; }
SparsePolynomial operator-(SparsePolynomial a, const SparsePolynomial& b) { return a -= b; }
SparsePolynomial operator*(SparsePolynomial a, double s) { return a *= s; }
SparsePolynomial operator*(double s, SparsePolynomial a) { return a *= s; }

SparsePolynomial multiply(const SparsePolynomial& a, const SparsePolynomial& b, std::size_t cap) {
  check_vars(a.n_vars(), b.n_vars());
  SparsePolynomial r(a.n_vars());
  Exponents e(a.n_vars());
  for (const auto& [ea, ca] : a.terms()) {
    for (const auto& [eb, cb] : b.terms()) {
      for (int i = 0; i < a.n_vars(); ++i) e[i] = ea[i] + eb[i];
      r.add_term(e, ca * cb);
      if (r.size() > cap)
        throw TermCapExceeded("polynomial product exceeds term cap of " + std::to_string(cap));
    }
  }
  return r;
}

SparsePolynomial operator*(const SparsePolynomial& a, const SparsePolynomial& b) {
  return multiply(a, b);
}

UnivariatePolynomial::UnivariatePolynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

double UnivariatePolynomial::operator()(double t) const {
  double s = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) s = s * t + *it;
  return s;
}

std::size_t monomial_count(int n_vars, int degree) {
  if (n_vars < 0 || degree < 0) throw std::invalid_argument("monomial_count: negative argument");
  // C(n+d, d) computed incrementally; each partial product is itself a binomial.
  std::size_t r = 1;
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  for (int i = 1; i <= degree; ++i) {
    std::size_t num = static_cast<std::size_t>(n_vars + i);
    if (r > kMax / num) return kMax;
    r = r * num / static_cast<std::size_t>(i);
  }
  return r;
}

std::vector<Exponents> monomial_basis(int n_vars, int degree, std::size_t cap) {
  std::size_t count = monomial_count(n_vars, degree);
  if (count > cap)
    throw TermCapExceeded("monomial basis of size " + std::to_string(count) + " exceeds cap " +
                          std::to_string(cap));
  std::vector<Exponents> out;
  out.reserve(count);
  Exponents e(n_vars, 0);
  // Within degree g, enumerate in graded-lex order by recursing on the
  // first variable from high exponent to low.
  std::function<void(int, int)> rec = [&](int var, int left) {
    if (var == n_vars - 1) {
      e[var] = left;
      out.push_back(e);
      return;
    }
    for (int k = left; k >= 0; --k) {
      e[var] = k;
      rec(var + 1, left - k);
    }
    e[var] = 0;
  };
  for (int g = 0; g <= degree; ++g) {
    if (n_vars == 0) {
      if (g == 0) out.push_back(e);
      continue;
    }
    rec(0, g);
  }
  return out;
}

std::vector<std::pair<int, int>> monomial_parents(const std::vector<Exponents>& basis) {
  std::map<Exponents, int> index;
  for (std::size_t i = 0; i < basis.size(); ++i) index.emplace(basis[i], static_cast<int>(i));
  std::vector<std::pair<int, int>> out(basis.size(), {-1, -1});
  for (std::size_t i = 0; i < basis.size(); ++i) {
    Exponents e = basis[i];
    auto it = std::find_if(e.begin(), e.end(), [](int v) { return v > 0; });
    if (it == e.end()) continue;
    int var = static_cast<int>(it - e.begin());
    --e[var];
    auto p = index.find(e);
    if (p == index.end()) throw std::invalid_argument("monomial_parents: basis is not downward closed");
    out[i] = {p->second, var};
  }
  return out;
}

void eval_monomials(const std::vector<std::pair<int, int>>& parents, const double* x, double* out) {
  for (std::size_t i = 0; i < parents.size(); ++i) {
    auto [p, v] = parents[i];
    out[i] = p < 0 ? 1.0 : out[p] * x[v];
  }
}

UnivariatePolynomial taylor_exp(int m) {
  if (m < 1) throw std::invalid_argument("taylor_exp: m must be >= 1");
  std::vector<double> c(m);
  c[0] = 1.0;
  for (int i = 1; i < m; ++i) c[i] = c[i - 1] / i;
  return UnivariatePolynomial(std::move(c));
}

double exp_l1_error(double a, int m) {
  if (!(a >= 0.0)) throw std::invalid_argument("exp_l1_error: a must be >= 0");
  auto q = taylor_exp(m);
  return normal_expectation([&](double t) {
    double y = -0.5 * a * a + a * t;
    return std::fabs(std::exp(y) - q(y));
  });
}

SparsePolynomial compose(const UnivariatePolynomial& outer, const SparsePolynomial& inner,
                         std::size_t cap) {
  const auto& c = outer.coeffs();
  SparsePolynomial r(inner.n_vars());
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    r = multiply(r, inner, cap);
    r += SparsePolynomial::constant(inner.n_vars(), *it);
  }
  return r;
}

SparsePolynomial poly_power(const SparsePolynomial& p, int m, std::size_t cap) {
  if (m < 0) throw std::invalid_argument("poly_power: negative exponent");
  SparsePolynomial result = SparsePolynomial::constant(p.n_vars(), 1.0);
  SparsePolynomial base = p;
  while (m > 0) {
    if (m & 1) result = multiply(result, base, cap);
    m >>= 1;
    if (m > 0) base = multiply(base, base, cap);
  }
  return result;
}

SparsePolynomial affine_substitute(const SparsePolynomial& p, double scale,
                                   std::span<const double> shift) {
  int n = p.n_vars();
  if (static_cast<int>(shift.size()) != n)
    throw std::invalid_argument("affine_substitute: shift dimension mismatch");
  std::vector<SparsePolynomial> lin;
  for (int i = 0; i < n; ++i)
    lin.push_back(SparsePolynomial::variable(n, i, scale) + SparsePolynomial::constant(n, shift[i]));
  SparsePolynomial r(n);
  for (const auto& [e, c] : p.terms()) {
    SparsePolynomial t = SparsePolynomial::constant(n, c);
    for (int i = 0; i < n; ++i)
      if (e[i] > 0) t = multiply(t, poly_power(lin[i], e[i]));
    r += t;
  }
  return r;
}

double power_coeff_bound(double t, int k, int ell, int m) {
  return std::pow(t, m) * std::pow(kCoeffConstant * k, static_cast<double>(ell) * m);
}

double compose_coeff_bound(double t1, double t2, int d, int ell1, int ell2) {
  return t1 * std::pow(std::max(t2, 1.0), ell1) *
         std::pow(kCoeffConstant * d, 2.0 * ell1 * ell2);
}

nlohmann::json to_json(const SparsePolynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [e, c] : p.terms()) terms.push_back({{"exps", e}, {"coeff", c}});
  return {{"n_vars", p.n_vars()}, {"terms", terms}};
}

SparsePolynomial polynomial_from_json(const nlohmann::json& j) {
  SparsePolynomial p(j.at("n_vars").get<int>());
  for (const auto& t : j.at("terms")) p.add_term(t.at("exps").get<Exponents>(), t.at("coeff").get<double>());
  return p;
}

}  // namespace smoothlab
