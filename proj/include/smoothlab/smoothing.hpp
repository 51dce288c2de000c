#pragma once

#include "smoothlab/concepts.hpp"
#include "smoothlab/dists.hpp"
#include "smoothlab/polynomial.hpp"

#include <json.hpp>

#include <string>

namespace smoothlab {

// T_rho f(x) = E_z f(sqrt(1 - rho^2) x + rho z). rho == 0 is exact.
EstimateReport ou_apply(const Concept& c, double rho, const Vector& x, std::size_t n, std::uint64_t seed);

// E_z |T_rho f(z) - f(z)|. Uses |T f - f| = 1 - f T f, so each outer draw
// averages n_inner single-draw terms and the per-outer means are iid.
EstimateReport ou_l1_error(const Concept& c, double rho, std::size_t n_outer, std::size_t n_inner,
                           std::uint64_t seed);
double ou_l1_bound(double rho, double gsa);  // 2 sqrt(pi rho) gsa
// Closed form for a unit-normal halfspace with offset b: 8 T(b, sqrt((1-r)/(1+r))), r = sqrt(1-rho^2).
double ou_l1_error_halfspace(double b, double rho);

struct GsaEstimate {
  EstimateReport at_delta;
  EstimateReport at_half_delta;
  double delta = 0.0;
  double shift() const { return at_delta.estimate - at_half_delta.estimate; }
};
// (1/delta) Pr_z[f(z) = -1 and dist(z) <= delta], plus the delta/2 reading from the same draws.
GsaEstimate gsa_mc(const Concept& c, double delta, std::size_t n, std::uint64_t seed);

// Pr_z[f(x + sigma z) != f(x)]. sigma == 0 is exactly 0.
EstimateReport sensitivity(const Concept& c, const Vector& x, double sigma, std::size_t n, std::uint64_t seed);
// E_{x~D} of the above with n_z inner draws per x.
EstimateReport expected_sensitivity(const Concept& c, const SamplerSpec& d, double sigma, std::size_t n_x,
                                    std::size_t n_z, std::uint64_t seed);

double sensitivity_bound_b5(double gamma, double sigma, int k);            // e^{-(gamma/sigma)^2/5 + k}
double sensitivity_bound_b6(double gamma, double sigma, int k);            // k e^{-gamma^2/(2 sigma^2)}
double sensitivity_bound_b11(int k, double M, double eps, double sigma);   // k (2 M eps + e^{-eps^2/(2 sigma^2)})

// Empirical Pr_{(x,y)~S, z}[f(x + sigma z) != y].
EstimateReport opt_sigma_term(const Concept& c, const Dataset& ds, double sigma, std::size_t n_z, std::uint64_t seed);
// Empirical Pr_{(x,y)~S}[f(x) != y or x in the gamma-margin]; exact-distance kinds only.
double margin_err_term(const Concept& c, const Dataset& ds, double gamma);

// E_z |f(u + z) - f(v + z)| and its bound 8 gsa ||u - v||.
EstimateReport translation_l1(const Concept& c, const Vector& u, const Vector& v, std::size_t n, std::uint64_t seed);
double translation_bound(double gsa, const Vector& u, const Vector& v);

// rho = min(1, (eps / gsa)^2 / (4 pi)).
double default_rho(double eps, double gsa);

// p_z(x) = mean_s f(sqrt(1-rho^2) z + rho s) q_m(-||x||^2/(2 rho^2) + (x/rho).s), in the
// k intrinsic variables of c; z has length k.
SparsePolynomial build_pz_bounded(const Concept& c, double rho, int m, const Vector& z, std::size_t n_s,
                                  std::uint64_t seed);

struct SubexpPz {
  SparsePolynomial poly;
  std::size_t truncated = 0;
  std::size_t rejected = 0;
};
// p_z(u) = p1(||u/rho||^2 / 2) mean_{x~Q} f(sqrt(1-rho^2) z + rho x) w(x) p_e((u/rho).x) 1{||x|| <= T},
// w(x) = N(x;0,I)/Q(x), p_e = taylor_exp(m). Draws with w > 1e300 are rejected.
SubexpPz build_pz_subexp(const Concept& c, double rho, const UnivariatePolynomial& p1, int m, double T,
                         const Vector& z, std::size_t n_s, std::uint64_t seed);

struct MetricReport {
  std::string suite_id;
  nlohmann::json params;
  double estimate = 0.0;
  double se = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
};
nlohmann::json to_json(const MetricReport& r);

}  // namespace smoothlab
