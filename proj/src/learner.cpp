#include "smoothlab/learner.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace smoothlab {

int default_repetitions(double eps, double delta) {
  if (!(eps > 0.0) || !(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("need eps > 0 and delta in (0,1)");
  return static_cast<int>(std::ceil(std::log(1.0 / delta) / eps));
}

std::size_t default_validation_n(double eps, double delta) {
  if (!(eps > 0.0) || !(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("need eps > 0 and delta in (0,1)");
  return 10 * static_cast<std::size_t>(std::ceil(std::log(1.0 / delta) / (eps * eps)));
}

void validate(const LearnerConfig& cfg) {
  if (cfg.degree < 1 || cfg.degree > kMaxDegree)
    throw std::invalid_argument("degree must be in [1, " + std::to_string(kMaxDegree) + "]");
  if (cfg.proj_dim && (*cfg.proj_dim < 1 || *cfg.proj_dim > kMaxProjDim))
    throw std::invalid_argument("proj_dim must be in [1, " + std::to_string(kMaxProjDim) + "]");
  if (cfg.repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (cfg.n_train < 1 || cfg.validation_n < 1) throw std::invalid_argument("n_train and validation_n must be >= 1");
}

double score(const Hypothesis& h, const Vector& x) {
  if (h.projection) {
    if (h.projection->cols() != x.size()) throw std::invalid_argument("predict: dimension mismatch");
    Vector z = (*h.projection) * x;
    return h.poly.eval(std::span<const double>(z.data(), z.size()));
  }
  return h.poly.eval(std::span<const double>(x.data(), x.size()));
}

int predict(const Hypothesis& h, const Vector& x) { return sign(score(h, x) - h.threshold); }

Vector scores(const Hypothesis& h, const Matrix& X) {
  Matrix Z = h.projection ? Matrix(X * h.projection->transpose()) : X;
  if (Z.cols() != h.poly.n_vars()) throw std::invalid_argument("scores: dimension mismatch");
  int deg = std::max(h.poly.degree(), 0);
  auto basis = monomial_basis(h.poly.n_vars(), deg);
  Vector coef(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) coef[static_cast<Eigen::Index>(i)] = h.poly.coeff(basis[i]);
  return design_matrix(Z, deg) * coef;
}

double empirical_01(const Hypothesis& h, const Dataset& ds) {
  if (ds.X.rows() == 0) throw std::invalid_argument("empirical_01: empty dataset");
  Vector s = scores(h, ds.X);
  return static_cast<double>(threshold_errors(s, ds.y, h.threshold)) / static_cast<double>(ds.X.rows());
}

nlohmann::json to_json(const Hypothesis& h) {
  nlohmann::json j;
  if (h.projection) {
    j["projection"] = {{"rows", h.projection->rows()},
                       {"cols", h.projection->cols()},
                       {"data", std::vector<double>(h.projection->data(), h.projection->data() + h.projection->size())}};
  } else {
    j["projection"] = nullptr;
  }
  j["poly"] = to_json(h.poly);
  j["threshold"] = h.threshold;
  return j;
}

Hypothesis hypothesis_from_json(const nlohmann::json& j) {
  Hypothesis h;
  if (!j.at("projection").is_null()) {
    const auto& p = j["projection"];
    auto data = p.at("data").get<std::vector<double>>();
    Eigen::Index r = p.at("rows").get<Eigen::Index>(), c = p.at("cols").get<Eigen::Index>();
    if (static_cast<Eigen::Index>(data.size()) != r * c) throw std::invalid_argument("projection data size mismatch");
    h.projection = Matrix(Eigen::Map<Matrix>(data.data(), r, c));
  }
  h.poly = polynomial_from_json(j.at("poly"));
  h.threshold = j.at("threshold").get<double>();
  return h;
}

Matrix random_projection(int m, int d, std::uint64_t seed) {
  if (m < 1 || d < 1) throw std::invalid_argument("random_projection: m and d must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> g;
  Matrix R(m, d);
  const double s = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index i = 0; i < R.size(); ++i) R.data()[i] = s * g(rng);
  return R;
}

double jl_check(const Matrix& W, const Matrix& S, int m, double eps, int trials, std::uint64_t seed) {
  if (W.cols() != S.cols()) throw std::invalid_argument("jl_check: W and S dimensions differ");
  if (trials < 1) throw std::invalid_argument("jl_check: trials must be >= 1");
  const int d = static_cast<int>(S.cols());
  Matrix WS = W * S.transpose();  // k x |S|
  std::vector<int> ok(static_cast<std::size_t>(trials), 0);
  parallel_shards(static_cast<std::size_t>(trials), [&](std::size_t t) {
    Matrix R = random_projection(m, d, derive_seed(seed, static_cast<std::uint64_t>(t)));
    Matrix approx = (W * R.transpose()) * (R * S.transpose());
    ok[t] = ((WS - approx).colwise().norm().array() <= eps).all();
  });
  int pass = 0;
  for (int v : ok) pass += v;
  return static_cast<double>(pass) / trials;
}

int jl_dimension(double B, double lambda, int k, std::size_t set_size, double delta, double eps, double C) {
  double bl = B * lambda;
  return static_cast<int>(std::ceil(C * bl * bl * k * std::log(static_cast<double>(set_size) / delta) / (eps * eps)));
}

DataStream make_stream(const SamplerSpec& s, const LabelModel& m, double margin) {
  return [s, m, margin](std::size_t n, std::uint64_t seed) { return draw_dataset(s, m, n, seed, margin); };
}

LearnResult learn(const DataStream& stream, const LearnerConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  LearnResult out;
  const int r = cfg.repetitions;
  std::vector<Dataset> train(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i)
    train[static_cast<std::size_t>(i)] = stream(cfg.n_train, derive_seed(seed, "train/" + std::to_string(i)));
  const int d = static_cast<int>(train[0].X.cols());

  std::optional<Matrix> R;
  if (cfg.proj_dim) R = random_projection(*cfg.proj_dim, d, derive_seed(seed, "projection"));
  const int vars = R ? *cfg.proj_dim : d;
  std::size_t features = monomial_count(vars, cfg.degree);
  if (features > cfg.n_train) {
    out.underdetermined = true;
    std::fprintf(stderr, "warning: %zu features exceed n_train = %zu (underdetermined fit)\n", features, cfg.n_train);
  }

  std::vector<Hypothesis> hyps(static_cast<std::size_t>(r));
  out.train_objectives.assign(static_cast<std::size_t>(r), 0.0);
  parallel_shards(static_cast<std::size_t>(r), [&](std::size_t i) {
    const Dataset& ds = train[i];
    Matrix Z = R ? Matrix(ds.X * R->transpose()) : ds.X;
    Matrix Phi = design_matrix(Z, cfg.degree);
    Vector y(static_cast<Eigen::Index>(ds.y.size()));
    for (std::size_t j = 0; j < ds.y.size(); ++j) y[static_cast<Eigen::Index>(j)] = ds.y[j];
    auto fit = l1_fit_irls(Phi, y, cfg.irls);
    auto th = threshold_select(Phi * fit.coef, ds.y);
    hyps[i] = Hypothesis{R, polynomial_from_coefficients(fit.coef, vars, cfg.degree), th.t};
    out.train_objectives[i] = fit.objective;
  });

  Dataset val = stream(cfg.validation_n, derive_seed(seed, "validation"));
  out.validation_errors.resize(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    out.validation_errors[static_cast<std::size_t>(i)] = empirical_01(hyps[static_cast<std::size_t>(i)], val);
    if (out.validation_errors[static_cast<std::size_t>(i)] < out.validation_errors[static_cast<std::size_t>(out.chosen)])
      out.chosen = i;
  }
  out.hypothesis = hyps[static_cast<std::size_t>(out.chosen)];
  return out;
}

}  // namespace smoothlab
