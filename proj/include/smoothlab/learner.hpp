#pragma once

#include "smoothlab/dists.hpp"
#include "smoothlab/polynomial.hpp"
#include "smoothlab/regress.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <vector>

namespace smoothlab {

inline constexpr int kMaxDegree = 8;
inline constexpr int kMaxProjDim = 64;

// Fixed IRLS budget for the learner: anneal 1e-1 -> 1e-3, two reweightings per stage.
inline IrlsOptions learner_irls() {
  IrlsOptions o;
  o.eps_end = 1e-3;
  o.max_iter_per_stage = 2;
  o.polish = false;
  return o;
}

struct LearnerConfig {
  int degree = 1;
  std::optional<int> proj_dim;  // none: regress in the ambient space
  std::size_t n_train = 1000;
  int repetitions = 1;
  std::size_t validation_n = 1000;
  double sigma = 0.0;  // reporting only
  IrlsOptions irls = learner_irls();
};

// r = ceil(log(1/delta)/eps), validation_n = 10 ceil(log(1/delta)/eps^2).
int default_repetitions(double eps, double delta);
std::size_t default_validation_n(double eps, double delta);
void validate(const LearnerConfig& cfg);

struct Hypothesis {
  std::optional<Matrix> projection;  // m x d
  SparsePolynomial poly;
  double threshold = 0.0;
};

double score(const Hypothesis& h, const Vector& x);
int predict(const Hypothesis& h, const Vector& x);
Vector scores(const Hypothesis& h, const Matrix& X);
double empirical_01(const Hypothesis& h, const Dataset& ds);

nlohmann::json to_json(const Hypothesis& h);
Hypothesis hypothesis_from_json(const nlohmann::json& j);

// m x d, entries N(0,1)/sqrt(m).
Matrix random_projection(int m, int d, std::uint64_t seed);

// Fraction of trials (fresh R each) with ||W x - W R^T R x|| <= eps for all rows x of S.
double jl_check(const Matrix& W, const Matrix& S, int m, double eps, int trials, std::uint64_t seed);
// ceil(C (B lambda)^2 k log(|S|/delta) / eps^2).
inline constexpr double kJlConstant = 1.0;
int jl_dimension(double B, double lambda, int k, std::size_t set_size, double delta, double eps,
                 double C = kJlConstant);

// Returns n labeled points drawn with the given seed.
using DataStream = std::function<Dataset(std::size_t n, std::uint64_t seed)>;
DataStream make_stream(const SamplerSpec& s, const LabelModel& m, double margin = 0.0);

struct LearnResult {
  Hypothesis hypothesis;
  std::vector<double> validation_errors;
  std::vector<double> train_objectives;
  int chosen = 0;
  bool underdetermined = false;
};

LearnResult learn(const DataStream& stream, const LearnerConfig& cfg, std::uint64_t seed);

}  // namespace smoothlab
