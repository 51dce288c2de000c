#pragma once

#include <json.hpp>

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace smoothlab {

using Exponents = std::vector<int>;

inline constexpr std::size_t kTermCap = 1'000'000;

struct TermCapExceeded : std::length_error {
  using std::length_error::length_error;
};

// Graded-lex: lower total degree first; within a degree, larger exponent on
// an earlier variable first, so (2 vars) 1, x1, x2, x1^2, x1x2, x2^2, ...
struct GradedLex {
  bool operator()(const Exponents& a, const Exponents& b) const;
};

class SparsePolynomial {
 public:
  using TermMap = std::map<Exponents, double, GradedLex>;

  explicit SparsePolynomial(int n_vars = 0);
  static SparsePolynomial constant(int n_vars, double c);
  static SparsePolynomial variable(int n_vars, int index, double coeff = 1.0);

  int n_vars() const { return n_vars_; }
  int degree() const;
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  const TermMap& terms() const { return terms_; }

  double coeff(const Exponents& e) const;
  void add_term(const Exponents& e, double c);
  double eval(std::span<const double> x) const;
  double max_abs_coeff() const;
  double sum_abs_coeff() const;

  SparsePolynomial& operator+=(const SparsePolynomial& o);
  SparsePolynomial& operator-=(const SparsePolynomial& o);
  SparsePolynomial& operator*=(double s);

 private:
  int n_vars_;
  TermMap terms_;
};

SparsePolynomial operator+(SparsePolynomial a, const SparsePolynomial& b);
SparsePolynomial operator-(SparsePolynomial a, const SparsePolynomial& b);
SparsePolynomial operator*(SparsePolynomial a, double s);
SparsePolynomial operator*(double s, SparsePolynomial a);
SparsePolynomial multiply(const SparsePolynomial& a, const SparsePolynomial& b,
                          std::size_t cap = kTermCap);
SparsePolynomial operator*(const SparsePolynomial& a, const SparsePolynomial& b);

class UnivariatePolynomial {
 public:
  UnivariatePolynomial() = default;
  explicit UnivariatePolynomial(std::vector<double> coeffs);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coeffs() const { return c_; }
  double operator()(double t) const;

 private:
  std::vector<double> c_;
};

// C(n+d, d), saturating at SIZE_MAX.
std::size_t monomial_count(int n_vars, int degree);
std::vector<Exponents> monomial_basis(int n_vars, int degree, std::size_t cap = kTermCap);

// For each basis element (in monomial_basis order) the index of the element
// with one fewer power of the first used variable, and that variable; the
// constant gets {-1, -1}.
std::vector<std::pair<int, int>> monomial_parents(const std::vector<Exponents>& basis);
// out[i] = x^basis[i], filled in one pass using the parent table.
void eval_monomials(const std::vector<std::pair<int, int>>& parents, const double* x, double* out);

// q_m(t) = sum_{i<m} t^i / i!  (degree m-1).
UnivariatePolynomial taylor_exp(int m);

// E_{t~N(0,1)} |e^{y} - q_m(y)| with y = -a^2/2 + a t, 200-node Gauss-Hermite.
double exp_l1_error(double a, int m);

// outer(inner(x)) by Horner in polynomial arithmetic.
SparsePolynomial compose(const UnivariatePolynomial& outer, const SparsePolynomial& inner,
                         std::size_t cap = kTermCap);
SparsePolynomial poly_power(const SparsePolynomial& p, int m, std::size_t cap = kTermCap);

// Substitutes x -> scale * x + shift (per variable).
SparsePolynomial affine_substitute(const SparsePolynomial& p, double scale,
                                   std::span<const double> shift);

// Chebyshev interpolant of e^{-x} on [0, T] in the monomial basis with
// sup error <= eps on a 10^4+1 point grid.
// Degree is at most kChebDegreeConstant * sqrt(max(T, L) L), L = ln(1/eps).
inline constexpr double kChebDegreeConstant = 2.0;
UnivariatePolynomial cheb_exp_neg(double T, double eps);
double cheb_sup_error(const UnivariatePolynomial& p, double T, int grid = 10001);

// Coefficient bounds with the documented constant C = 2.
inline constexpr double kCoeffConstant = 2.0;
// p of degree ell in k vars with |coeffs| <= t: p^m has |coeffs| <= t^m (C k)^{ell m}.
double power_coeff_bound(double t, int k, int ell, int m);
// outer of degree ell1 with |coeffs| <= t1, inner of degree ell2 >= 1 in d vars with
// |coeffs| <= t2: |coeffs| <= t1 max(t2,1)^{ell1} (C d)^{2 ell1 ell2}.
double compose_coeff_bound(double t1, double t2, int d, int ell1, int ell2);

nlohmann::json to_json(const SparsePolynomial& p);
SparsePolynomial polynomial_from_json(const nlohmann::json& j);

}  // namespace smoothlab
