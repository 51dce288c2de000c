#include "smoothlab/smoothing.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace smoothlab {

namespace {

double factorial_of(const Exponents& e) {
  double f = 1.0;
  for (int v : e)
    for (int i = 2; i <= v; ++i) f *= i;
  return f;
}

int degree_of(const Exponents& e) {
  int s = 0;
  for (int v : e) s += v;
  return s;
}

// -||x||^2 * scale in k variables.
SparsePolynomial neg_square_norm(int k, double scale) {
  SparsePolynomial p(k);
  for (int i = 0; i < k; ++i) {
    Exponents e(k, 0);
    e[i] = 2;
    p.add_term(e, -scale);
  }
  return p;
}

// Weighted moments sum_j g(draw_j) * x_j^alpha over n draws, sharded so the
// result is independent of the worker count. g returns false to skip a draw.
template <class Draw>
std::vector<double> moments(const std::vector<Exponents>& basis, std::size_t n, std::uint64_t seed, Draw&& draw_fn,
                            std::size_t* skipped_a = nullptr, std::size_t* skipped_b = nullptr) {
  auto parents = monomial_parents(basis);
  const std::size_t B = basis.size();
  std::size_t shards = (n + kShardSize - 1) / kShardSize;
  std::vector<std::vector<double>> part(shards, std::vector<double>(B, 0.0));
  std::vector<std::size_t> ska(shards, 0), skb(shards, 0);
  parallel_shards(shards, [&](std::size_t s) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    std::vector<double> mono(B);
    for (std::size_t i = s * kShardSize; i < std::min(n, (s + 1) * kShardSize); ++i) {
      Vector x;
      double weight = 0.0;
      int status = draw_fn(rng, x, weight);
      if (status == 1) { ++ska[s]; continue; }
      if (status == 2) { ++skb[s]; continue; }
      eval_monomials(parents, x.data(), mono.data());
      for (std::size_t b = 0; b < B; ++b) part[s][b] += weight * mono[b];
    }
  });
  std::vector<double> total(B, 0.0);
  for (std::size_t s = 0; s < shards; ++s) {
    for (std::size_t b = 0; b < B; ++b) total[b] += part[s][b];
    if (skipped_a) *skipped_a += ska[s];
    if (skipped_b) *skipped_b += skb[s];
  }
  return total;
}

}  // namespace

SparsePolynomial build_pz_bounded(const Concept& c, double rho, int m, const Vector& z, std::size_t n_s,
                                  std::uint64_t seed) {
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("build_pz_bounded: rho must be in (0, 1]");
  if (m < 1) throw std::invalid_argument("build_pz_bounded: m must be >= 1");
  if (n_s == 0) throw std::invalid_argument("build_pz_bounded: n_s must be >= 1");
  const int k = c.k;
  if (z.size() != k) throw std::invalid_argument("build_pz_bounded: z must have the concept's intrinsic dimension");
  const double a = std::sqrt(1.0 - rho * rho);

  // q_m(A + B) with A = -||x||^2/(2 rho^2), B = (x/rho).s expands to
  // sum_j B^j / j! q_{m-j}(A); averaging f B^j / j! over s leaves moments of s.
  auto basis = monomial_basis(k, m - 1);
  auto M = moments(basis, n_s, seed, [&](Rng& rng, Vector& s, double& w) {
    s = standard_normal(rng, k);
    w = eval_intrinsic(c, Vector(a * z + rho * s));
    return 0;
  });

  const SparsePolynomial A = neg_square_norm(k, 0.5 / (rho * rho));
  std::vector<SparsePolynomial> G(static_cast<std::size_t>(m), SparsePolynomial(k));
  for (std::size_t b = 0; b < basis.size(); ++b) {
    int j = degree_of(basis[b]);
    double coef = M[b] / static_cast<double>(n_s) / (factorial_of(basis[b]) * std::pow(rho, j));
    G[static_cast<std::size_t>(j)].add_term(basis[b], coef);
  }
  SparsePolynomial out(k);
  for (int j = 0; j < m; ++j) {
    if (G[static_cast<std::size_t>(j)].is_zero()) continue;
    out += multiply(G[static_cast<std::size_t>(j)], compose(taylor_exp(m - j), A));
  }
  return out;
}

SubexpPz build_pz_subexp(const Concept& c, double rho, const UnivariatePolynomial& p1, int m, double T,
                         const Vector& z, std::size_t n_s, std::uint64_t seed) {
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("build_pz_subexp: rho must be in (0, 1]");
  if (!(T > 0.0)) throw std::invalid_argument("build_pz_subexp: T must be > 0");
  if (m < 1) throw std::invalid_argument("build_pz_subexp: m must be >= 1");
  if (n_s == 0) throw std::invalid_argument("build_pz_subexp: n_s must be >= 1");
  const int k = c.k;
  if (z.size() != k) throw std::invalid_argument("build_pz_subexp: z must have the concept's intrinsic dimension");
  const double a = std::sqrt(1.0 - rho * rho);
  const double log_norm = k * std::numbers::ln2 - 0.5 * k * std::log(2.0 * std::numbers::pi);
  const SamplerSpec q = SamplerSpec::laplace_q(k);

  SubexpPz out{SparsePolynomial(k), 0, 0};
  auto basis = monomial_basis(k, m - 1);
  auto M = moments(
      basis, n_s, seed,
      [&](Rng& rng, Vector& x, double& w) {
        x = draw(q, rng);
        if (x.norm() > T) return 1;
        double lw = -0.5 * x.squaredNorm() + x.lpNorm<1>() + log_norm;
        if (lw > std::log(1e300)) return 2;
        w = std::exp(lw) * eval_intrinsic(c, Vector(a * z + rho * x));
        return 0;
      },
      &out.truncated, &out.rejected);

  // p_e((u/rho).x) averaged: sum_alpha u^alpha E[. x^alpha] / (alpha! rho^|alpha|).
  SparsePolynomial qpoly(k);
  for (std::size_t b = 0; b < basis.size(); ++b)
    qpoly.add_term(basis[b], M[b] / static_cast<double>(n_s) /
                                 (factorial_of(basis[b]) * std::pow(rho, degree_of(basis[b]))));
  SparsePolynomial p1u = compose(p1, neg_square_norm(k, -0.5 / (rho * rho)));
  out.poly = multiply(p1u, qpoly);
  return out;
}

}  // namespace smoothlab
