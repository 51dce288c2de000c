#include "smoothlab/polynomial.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace smoothlab {

namespace {

using ld = long double;

// Degree-n interpolant of e^{-x} at the n+1 Chebyshev points of [0, T],
// converted to monomials in x. Conversion runs in long double.
UnivariatePolynomial interpolant(double T, int n) {
  const int N = n + 1;
  const ld pi = std::numbers::pi_v<ld>;
  std::vector<ld> fv(N);
  for (int j = 0; j < N; ++j) {
    ld u = std::cos(pi * (j + 0.5L) / N);
    fv[j] = std::exp(-static_cast<ld>(T) * (u + 1) / 2);
  }
  std::vector<ld> a(N, 0.0L);
  for (int k = 0; k < N; ++k) {
    ld s = 0;
    for (int j = 0; j < N; ++j) s += fv[j] * std::cos(pi * k * (j + 0.5L) / N);
    a[k] = (k == 0 ? 1.0L : 2.0L) * s / N;
  }
  // Monomial coefficients in u via T_{k+1} = 2u T_k - T_{k-1}.
  std::vector<ld> b(N, 0.0L), tkm1(N, 0.0L), tk(N, 0.0L);
  tkm1[0] = 1;
  b[0] += a[0];
  if (N > 1) {
    tk[1] = 1;
    b[1] += a[1];
  }
  for (int k = 2; k < N; ++k) {
    std::vector<ld> next(N, 0.0L);
    for (int i = 0; i < N - 1; ++i) next[i + 1] += 2 * tk[i];
    for (int i = 0; i < N; ++i) next[i] -= tkm1[i];
    for (int i = 0; i < N; ++i) b[i] += a[k] * next[i];
    tkm1.swap(tk);
    tk.swap(next);
  }
  // u = (2/T) x - 1.
  std::vector<ld> c(N, 0.0L), pw(N, 0.0L);
  pw[0] = 1;
  const ld s = 2.0L / T;
  for (int i = 0; i < N; ++i) {
    for (int r = 0; r <= i; ++r) c[r] += b[i] * pw[r];
    std::vector<ld> next(N, 0.0L);
    for (int r = 0; r <= i && r + 1 < N; ++r) {
      next[r + 1] += s * pw[r];
      next[r] -= pw[r];
    }
    pw.swap(next);
  }
  std::vector<double> out(c.begin(), c.end());
  return UnivariatePolynomial(std::move(out));
}

}  // namespace

double cheb_sup_error(const UnivariatePolynomial& p, double T, int grid) {
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    double x = T * i / (grid - 1);
    worst = std::max(worst, std::fabs(p(x) - std::exp(-x)));
  }
  return worst;
}

UnivariatePolynomial cheb_exp_neg(double T, double eps) {
  if (!(T > 0.0)) throw std::invalid_argument("cheb_exp_neg: T must be > 0");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("cheb_exp_neg: eps must be in (0,1)");
  constexpr int kMaxDegree = 512;
  int n = 1;
  UnivariatePolynomial best = interpolant(T, n);
  while (cheb_sup_error(best, T) > eps) {
    n *= 2;
    if (n > kMaxDegree) throw std::runtime_error("cheb_exp_neg: tolerance not reached by degree 512 (monomial coefficients lose precision for large T)");
    best = interpolant(T, n);
  }
  // Bisect down to the smallest passing degree in (n/2, n].
  int lo = n / 2, hi = n;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    auto p = interpolant(T, mid);
    if (cheb_sup_error(p, T) <= eps) {
      hi = mid;
      best = std::move(p);
    } else {
      lo = mid;
    }
  }
  return best;
}

}  // namespace smoothlab
