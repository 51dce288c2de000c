#pragma once

#include "smoothlab/concepts.hpp"
#include "smoothlab/core.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace smoothlab {

enum class SamplerKind { UnitBall, IsoGaussian, SubExp, LaplaceQ, Hypercube, PointMass, Smoothed, Linear };

struct SamplerSpec {
  SamplerKind kind = SamplerKind::IsoGaussian;
  int d = 1;
  double scale = 1.0;                  // IsoGaussian standard deviation
  double alpha = 1.0, lambda = 1.0;    // SubExp: density per coordinate ~ exp(-(|t|/lambda)^(1+alpha))
  Vector point;                        // PointMass
  double tau = 0.0;                    // Smoothed: base + tau * N(0, I)
  Matrix A;                            // Linear: A * base
  std::shared_ptr<const SamplerSpec> base;

  static SamplerSpec unit_ball(int d);
  static SamplerSpec iso_gaussian(int d, double scale = 1.0);
  static SamplerSpec subexp(int d, double alpha, double lambda);
  static SamplerSpec laplace_q(int k);
  static SamplerSpec hypercube(int d);
  static SamplerSpec point_mass(const Vector& x);
  static SamplerSpec smoothed(const SamplerSpec& base, double tau);
  static SamplerSpec linear(const SamplerSpec& base, const Matrix& A);
};

int dim(const SamplerSpec& s);
Vector draw(const SamplerSpec& s, Rng& rng);
// n x d matrix; row i of shard s comes from Rng(derive_seed(seed, s)).
Matrix sample(const SamplerSpec& s, std::size_t n, std::uint64_t seed);

nlohmann::json to_json(const SamplerSpec& s);
SamplerSpec sampler_from_json(const nlohmann::json& j);

enum class Placement { Near, Far };

struct LabelModel {
  enum class Kind { Clean, FlipRate, BoundaryAdversary } kind = Kind::Clean;
  Concept target;
  double eta = 0.0;
  Placement placement = Placement::Far;
  double band = 0.0;

  static LabelModel clean(const Concept& c);
  static LabelModel flip_rate(const Concept& c, double eta);
  static LabelModel boundary_adversary(const Concept& c, double eta, Placement p, double band);
};

// The target concept is stored separately; from_json takes it as an argument.
nlohmann::json to_json(const LabelModel& m);
LabelModel label_model_from_json(const nlohmann::json& j, const Concept& target);

struct Dataset {
  Matrix X;
  std::vector<int> y;
  double achieved_flip_rate = 0.0;
  nlohmann::json provenance;
};

// margin > 0 keeps only points whose boundary distance to m.target exceeds it.
Dataset draw_dataset(const SamplerSpec& s, const LabelModel& m, std::size_t n, std::uint64_t seed,
                     double margin = 0.0);
void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

struct CheckRow {
  std::size_t direction = 0;
  double lo = 0.0, hi = 0.0;   // t for tails; interval for anti-concentration
  double estimate = 0.0, se = 0.0, bound = 0.0;
  bool pass = true;
};

struct CheckReport {
  std::vector<CheckRow> rows;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool pass = true;
};

// Pr[x.v > t] <= 2 exp(-(t/lambda)^(1+alpha)); row passes iff estimate <= bound + 3 SE.
CheckReport tail_check(const Matrix& points, double alpha, double lambda, const Matrix& directions,
                       const std::vector<double>& t_grid);
CheckReport tail_check(const SamplerSpec& s, double alpha, double lambda, const Matrix& directions,
                       const std::vector<double>& t_grid, std::size_t n, std::uint64_t seed);

// Pr[x.v in [a,b]] <= M (b - a); row passes iff estimate + 3 SE <= bound.
CheckReport anti_concentration_check(const SamplerSpec& s, double M, const Matrix& directions,
                                     const std::vector<std::pair<double, double>>& intervals,
                                     std::size_t n, std::uint64_t seed);

// Tail parameters of base + tau N(0,I) given base parameters: (min(alpha,1), C max(lambda,tau)).
inline constexpr double kSmoothedTailConstant = 5.770780163555854;  // 4 / ln 2
std::pair<double, double> smoothed_tail_params(double alpha, double lambda, double tau);

// E_{x~Q}[(N(x;u,I)/Q(x))^4] for Q = LaplaceQ{k}, k = u.size().
EstimateReport laplace_ratio_moment(const Vector& u, std::size_t n, std::uint64_t seed);
double laplace_ratio_moment_exact(const Vector& u);

// Pr[||x||_2 > T] and its bound 2k e^{-T/k} for LaplaceQ{k}.
EstimateReport norm_tail(const SamplerSpec& s, double T, std::size_t n, std::uint64_t seed);
double laplace_norm_tail_bound(int k, double T);

// E[exp(b ||x||_1)].
EstimateReport l1_mgf(const SamplerSpec& s, double b, std::size_t n, std::uint64_t seed);

}  // namespace smoothlab
