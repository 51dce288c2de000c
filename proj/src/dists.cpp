#include "smoothlab/dists.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace smoothlab {

namespace {

double std_exponential(Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  return e(rng);
}

double laplace(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double e = std_exponential(rng);
  return u(rng) < 0.5 ? -e : e;
}

// One coordinate with density proportional to exp(-|y|^beta), beta > 1, by
// rejection from a Laplace(1) envelope.
double subexp_unit(Rng& rng, double beta) {
  double ystar = std::pow(beta, -1.0 / (beta - 1.0));
  double log_m = ystar - std::pow(ystar, beta);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    double y = laplace(rng);
    double a = std::fabs(y);
    if (std::log(u(rng)) <= -std::pow(a, beta) + a - log_m) return y;
  }
}

const char* sampler_name(SamplerKind k) {
  switch (k) {
    case SamplerKind::UnitBall: return "unit_ball";
    case SamplerKind::IsoGaussian: return "iso_gaussian";
    case SamplerKind::SubExp: return "subexp";
    case SamplerKind::LaplaceQ: return "laplace_q";
    case SamplerKind::Hypercube: return "hypercube";
    case SamplerKind::PointMass: return "point_mass";
    case SamplerKind::Smoothed: return "smoothed";
    case SamplerKind::Linear: return "linear";
  }
  return "?";
}

void require_positive_dim(int d) {
  if (d < 1) throw std::invalid_argument("sampler dimension must be >= 1");
}

}  // namespace

SamplerSpec SamplerSpec::unit_ball(int d) {
  require_positive_dim(d);
  SamplerSpec s;
  s.kind = SamplerKind::UnitBall;
  s.d = d;
  return s;
}

SamplerSpec SamplerSpec::iso_gaussian(int d, double scale) {
  require_positive_dim(d);
  if (!(scale > 0.0)) throw std::invalid_argument("iso_gaussian: scale must be > 0");
  SamplerSpec s;
  s.kind = SamplerKind::IsoGaussian;
  s.d = d;
  s.scale = scale;
  return s;
}

SamplerSpec SamplerSpec::subexp(int d, double alpha, double lambda) {
  require_positive_dim(d);
  if (!(alpha > 0.0) || !(lambda > 0.0)) throw std::invalid_argument("subexp: alpha and lambda must be > 0");
  SamplerSpec s;
  s.kind = SamplerKind::SubExp;
  s.d = d;
  s.alpha = alpha;
  s.lambda = lambda;
  return s;
}

SamplerSpec SamplerSpec::laplace_q(int k) {
  require_positive_dim(k);
  SamplerSpec s;
  s.kind = SamplerKind::LaplaceQ;
  s.d = k;
  return s;
}

SamplerSpec SamplerSpec::hypercube(int d) {
  require_positive_dim(d);
  SamplerSpec s;
  s.kind = SamplerKind::Hypercube;
  s.d = d;
  return s;
}

SamplerSpec SamplerSpec::point_mass(const Vector& x) {
  require_positive_dim(static_cast<int>(x.size()));
  SamplerSpec s;
  s.kind = SamplerKind::PointMass;
  s.d = static_cast<int>(x.size());
  s.point = x;
  return s;
}

SamplerSpec SamplerSpec::smoothed(const SamplerSpec& base, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("smoothed: tau must be >= 0");
  SamplerSpec s;
  s.kind = SamplerKind::Smoothed;
  s.d = dim(base);
  s.tau = tau;
  s.base = std::make_shared<const SamplerSpec>(base);
  return s;
}

SamplerSpec SamplerSpec::linear(const SamplerSpec& base, const Matrix& A) {
  if (A.cols() != dim(base)) throw std::invalid_argument("linear: A has wrong number of columns");
  SamplerSpec s;
  s.kind = SamplerKind::Linear;
  s.d = static_cast<int>(A.rows());
  s.A = A;
  s.base = std::make_shared<const SamplerSpec>(base);
  return s;
}

int dim(const SamplerSpec& s) { return s.d; }

Vector draw(const SamplerSpec& s, Rng& rng) {
  switch (s.kind) {
    case SamplerKind::UnitBall: {
      Vector g = standard_normal(rng, s.d);
      double n = g.norm();
      std::uniform_real_distribution<double> u(0.0, 1.0);
      double r = std::pow(u(rng), 1.0 / s.d);
      return n > 0.0 ? Vector(g * (r / n)) : Vector::Zero(s.d);
    }
    case SamplerKind::IsoGaussian:
      return s.scale * standard_normal(rng, s.d);
    case SamplerKind::SubExp: {
      Vector x(s.d);
      for (int i = 0; i < s.d; ++i) x[i] = s.lambda * subexp_unit(rng, 1.0 + s.alpha);
      return x;
    }
    case SamplerKind::LaplaceQ: {
      Vector x(s.d);
      for (int i = 0; i < s.d; ++i) x[i] = laplace(rng);
      return x;
    }
    case SamplerKind::Hypercube: {
      Vector x(s.d);
      std::bernoulli_distribution b(0.5);
      for (int i = 0; i < s.d; ++i) x[i] = b(rng) ? 1.0 : -1.0;
      return x;
    }
    case SamplerKind::PointMass:
      return s.point;
    case SamplerKind::Smoothed: {
      Vector x = draw(*s.base, rng);
      return x + s.tau * standard_normal(rng, s.d);
    }
    case SamplerKind::Linear:
      return s.A * draw(*s.base, rng);
  }
  throw std::logic_error("unknown sampler kind");
}

Matrix sample(const SamplerSpec& s, std::size_t n, std::uint64_t seed) {
  Matrix X(static_cast<Eigen::Index>(n), s.d);
  std::size_t shards = (n + kShardSize - 1) / kShardSize;
  parallel_shards(shards, [&](std::size_t sh) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(sh)));
    std::size_t hi = std::min(n, (sh + 1) * kShardSize);
    for (std::size_t i = sh * kShardSize; i < hi; ++i) X.row(static_cast<Eigen::Index>(i)) = draw(s, rng).transpose();
  });
  return X;
}

nlohmann::json to_json(const SamplerSpec& s) {
  nlohmann::json j{{"kind", sampler_name(s.kind)}, {"d", s.d}};
  switch (s.kind) {
    case SamplerKind::IsoGaussian: j["scale"] = s.scale; break;
    case SamplerKind::SubExp:
      j["alpha"] = s.alpha;
      j["lambda"] = s.lambda;
      break;
    case SamplerKind::PointMass: j["point"] = std::vector<double>(s.point.data(), s.point.data() + s.point.size()); break;
    case SamplerKind::Smoothed:
      j["tau"] = s.tau;
      j["base"] = to_json(*s.base);
      break;
    case SamplerKind::Linear: {
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index r = 0; r < s.A.rows(); ++r)
        rows.push_back(std::vector<double>(s.A.row(r).data(), s.A.row(r).data() + s.A.cols()));
      j["A"] = rows;
      j["base"] = to_json(*s.base);
      break;
    }
    default: break;
  }
  return j;
}

SamplerSpec sampler_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "unit_ball") return SamplerSpec::unit_ball(j.at("d").get<int>());
  if (kind == "iso_gaussian") return SamplerSpec::iso_gaussian(j.at("d").get<int>(), j.value("scale", 1.0));
  if (kind == "subexp")
    return SamplerSpec::subexp(j.at("d").get<int>(), j.at("alpha").get<double>(), j.at("lambda").get<double>());
  if (kind == "laplace_q") return SamplerSpec::laplace_q(j.contains("k") ? j["k"].get<int>() : j.at("d").get<int>());
  if (kind == "hypercube") return SamplerSpec::hypercube(j.at("d").get<int>());
  if (kind == "point_mass") {
    auto p = j.at("point").get<std::vector<double>>();
    return SamplerSpec::point_mass(Eigen::Map<Vector>(p.data(), static_cast<Eigen::Index>(p.size())));
  }
  if (kind == "smoothed") return SamplerSpec::smoothed(sampler_from_json(j.at("base")), j.at("tau").get<double>());
  if (kind == "linear") {
    const auto& rows = j.at("A");
    Matrix A(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.at(0).size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto v = rows[r].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(v.size()) != A.cols()) throw std::invalid_argument("linear: ragged A");
      for (std::size_t c = 0; c < v.size(); ++c) A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[c];
    }
    return SamplerSpec::linear(sampler_from_json(j.at("base")), A);
  }
  throw std::invalid_argument("unknown sampler kind '" + kind + "'");
}

nlohmann::json to_json(const LabelModel& m) {
  const char* kind = m.kind == LabelModel::Kind::Clean      ? "clean"
                     : m.kind == LabelModel::Kind::FlipRate ? "flip_rate"
                                                            : "boundary_adversary";
  return {{"kind", kind}, {"eta", m.eta}, {"band", m.band}, {"placement", m.placement == Placement::Near ? "near" : "far"}};
}

LabelModel label_model_from_json(const nlohmann::json& j, const Concept& target) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "clean") return LabelModel::clean(target);
  if (kind == "flip_rate") return LabelModel::flip_rate(target, j.at("eta").get<double>());
  if (kind == "boundary_adversary") {
    const auto place = j.value("placement", std::string("far"));
    if (place != "near" && place != "far") throw std::invalid_argument("label_model: placement must be 'near' or 'far'");
    return LabelModel::boundary_adversary(target, j.at("eta").get<double>(),
                                          place == "near" ? Placement::Near : Placement::Far, j.at("band").get<double>());
  }
  throw std::invalid_argument("unknown label model kind '" + kind + "'");
}

LabelModel LabelModel::clean(const Concept& c) {
  LabelModel m;
  m.kind = Kind::Clean;
  m.target = c;
  return m;
}

LabelModel LabelModel::flip_rate(const Concept& c, double eta) {
  if (!(eta >= 0.0 && eta <= 0.5)) throw std::invalid_argument("flip rate must be in [0, 0.5]");
  LabelModel m = clean(c);
  m.kind = Kind::FlipRate;
  m.eta = eta;
  return m;
}

LabelModel LabelModel::boundary_adversary(const Concept& c, double eta, Placement p, double band) {
  if (!(eta >= 0.0 && eta <= 0.5)) throw std::invalid_argument("flip rate must be in [0, 0.5]");
  if (!(band >= 0.0)) throw std::invalid_argument("band must be >= 0");
  LabelModel m = clean(c);
  m.kind = Kind::BoundaryAdversary;
  m.eta = eta;
  m.placement = p;
  m.band = band;
  return m;
}

namespace {

// Rejection to boundary distance > margin, in rounds of fixed-size batches.
Matrix sample_with_margin(const SamplerSpec& s, const Concept& c, double margin, std::size_t n, std::uint64_t seed) {
  Matrix X(static_cast<Eigen::Index>(n), dim(s));
  std::size_t have = 0;
  constexpr std::size_t kBatch = 65536;
  constexpr std::uint64_t kMaxRounds = 100000;
  for (std::uint64_t round = 0; have < n; ++round) {
    if (round == kMaxRounds) throw std::runtime_error("margin conditioning: acceptance rate too low");
    Matrix B = sample(s, kBatch, derive_seed(seed, round));
    std::vector<char> keep(kBatch, 0);
    parallel_shards((kBatch + kShardSize - 1) / kShardSize, [&](std::size_t sh) {
      std::size_t hi = std::min(kBatch, (sh + 1) * kShardSize);
      for (std::size_t i = sh * kShardSize; i < hi; ++i)
        keep[i] = in_margin_boundary(c, B.row(static_cast<Eigen::Index>(i)).transpose(), margin) == Tri::False;
    });
    for (std::size_t i = 0; i < kBatch && have < n; ++i)
      if (keep[i]) X.row(static_cast<Eigen::Index>(have++)) = B.row(static_cast<Eigen::Index>(i));
  }
  return X;
}

}  // namespace

Dataset draw_dataset(const SamplerSpec& s, const LabelModel& m, std::size_t n, std::uint64_t seed, double margin) {
  if (dim(s) != m.target.ambient_dim) throw std::invalid_argument("sampler and concept dimensions differ");
  if (!(margin >= 0.0)) throw std::invalid_argument("margin must be >= 0");
  Dataset ds;
  ds.X = margin > 0.0 ? sample_with_margin(s, m.target, margin, n, derive_seed(seed, "points"))
                      : sample(s, n, derive_seed(seed, "points"));
  ds.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.y[i] = eval(m.target, ds.X.row(static_cast<Eigen::Index>(i)).transpose());
  Rng rng(derive_seed(seed, "labels"));
  std::size_t flipped = 0;
  if (m.kind == LabelModel::Kind::FlipRate) {
    std::bernoulli_distribution flip(m.eta);
    for (auto& y : ds.y)
      if (flip(rng)) {
        y = -y;
        ++flipped;
      }
  } else if (m.kind == LabelModel::Kind::BoundaryAdversary) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < n; ++i) {
      Tri t = in_margin_boundary(m.target, ds.X.row(static_cast<Eigen::Index>(i)).transpose(), m.band);
      bool near = t == Tri::True;
      bool far = t == Tri::False;
      if ((m.placement == Placement::Near && near) || (m.placement == Placement::Far && far)) eligible.push_back(i);
    }
    std::size_t target = std::min(eligible.size(), static_cast<std::size_t>(std::llround(m.eta * static_cast<double>(n))));
    for (std::size_t i = 0; i < target; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, eligible.size() - 1);
      std::swap(eligible[i], eligible[pick(rng)]);
      ds.y[eligible[i]] = -ds.y[eligible[i]];
    }
    flipped = target;
  }
  ds.achieved_flip_rate = n ? static_cast<double>(flipped) / static_cast<double>(n) : 0.0;
  ds.provenance = {{"sampler", to_json(s)},
                   {"concept", to_json(m.target)},
                   {"label_model", to_json(m)},
                   {"margin", margin},
                   {"n", n},
                   {"seed", seed},
                   {"achieved_flip_rate", ds.achieved_flip_rate}};
  return ds;
}

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const Eigen::Index d = ds.X.cols();
  for (Eigen::Index j = 0; j < d; ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  char buf[64];
  for (Eigen::Index i = 0; i < ds.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,", ds.X(i, j));
      out << buf;
    }
    out << ds.y[static_cast<std::size_t>(i)] << '\n';
  }
  std::ofstream side(path.string() + ".json");
  side << ds.provenance.dump(2) << '\n';
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file");
  const auto cols = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  std::vector<double> vals;
  std::vector<int> y;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Eigen::Index c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c < cols) vals.push_back(std::stod(cell));
      else y.push_back(std::stoi(cell));
      ++c;
    }
    if (c != cols + 1) throw std::runtime_error("ragged row in " + path.string());
  }
  Dataset ds;
  ds.X = Eigen::Map<Matrix>(vals.data(), static_cast<Eigen::Index>(y.size()), cols);
  ds.y = std::move(y);
  std::ifstream side(path.string() + ".json");
  if (side) ds.provenance = nlohmann::json::parse(side);
  return ds;
}

CheckReport tail_check(const Matrix& points, double alpha, double lambda, const Matrix& directions,
                       const std::vector<double>& t_grid) {
  CheckReport rep;
  rep.n = static_cast<std::size_t>(points.rows());
  const double n = static_cast<double>(points.rows());
  for (Eigen::Index v = 0; v < directions.rows(); ++v) {
    Vector dir = directions.row(v).transpose().normalized();
    Vector proj = points * dir;
    for (double t : t_grid) {
      double p = static_cast<double>((proj.array() > t).count()) / n;
      CheckRow row;
      row.direction = static_cast<std::size_t>(v);
      row.lo = row.hi = t;
      row.estimate = p;
      row.se = std::sqrt(p * (1.0 - p) / n);
      row.bound = 2.0 * std::exp(-std::pow(std::max(t, 0.0) / lambda, 1.0 + alpha));
      row.pass = row.estimate <= row.bound + 3.0 * row.se;
      rep.pass = rep.pass && row.pass;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

CheckReport tail_check(const SamplerSpec& s, double alpha, double lambda, const Matrix& directions,
                       const std::vector<double>& t_grid, std::size_t n, std::uint64_t seed) {
  auto rep = tail_check(sample(s, n, seed), alpha, lambda, directions, t_grid);
  rep.seed = seed;
  return rep;
}

CheckReport anti_concentration_check(const SamplerSpec& s, double M, const Matrix& directions,
                                     const std::vector<std::pair<double, double>>& intervals,
                                     std::size_t n, std::uint64_t seed) {
  Matrix X = sample(s, n, seed);
  CheckReport rep;
  rep.n = n;
  rep.seed = seed;
  const double nn = static_cast<double>(n);
  for (Eigen::Index v = 0; v < directions.rows(); ++v) {
    Vector proj = X * directions.row(v).transpose().normalized();
    for (auto [a, b] : intervals) {
      if (!(b >= a)) throw std::invalid_argument("anti_concentration_check: interval with hi < lo");
      double p = static_cast<double>(((proj.array() >= a) && (proj.array() <= b)).count()) / nn;
      CheckRow row;
      row.direction = static_cast<std::size_t>(v);
      row.lo = a;
      row.hi = b;
      row.estimate = p;
      row.se = std::sqrt(p * (1.0 - p) / nn);
      row.bound = M * (b - a);
      row.pass = row.estimate + 3.0 * row.se <= row.bound;
      rep.pass = rep.pass && row.pass;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

std::pair<double, double> smoothed_tail_params(double alpha, double lambda, double tau) {
  return {std::min(alpha, 1.0), kSmoothedTailConstant * std::max(lambda, tau)};
}

EstimateReport laplace_ratio_moment(const Vector& u, std::size_t n, std::uint64_t seed) {
  const auto k = u.size();
  const double log_norm = -0.5 * static_cast<double>(k) * std::log(2.0 * std::numbers::pi);
  const double log2k = static_cast<double>(k) * std::numbers::ln2;
  return mc_mean(n, seed, [&](Rng& rng) {
    double lr = log_norm + log2k;
    for (Eigen::Index i = 0; i < k; ++i) {
      double x = laplace(rng);
      lr += -0.5 * (x - u[i]) * (x - u[i]) + std::fabs(x);
    }
    return std::exp(4.0 * lr);
  });
}

double laplace_ratio_moment_exact(const Vector& u) {
  // Per coordinate: 8 (2 pi)^-2 int exp(-2(x-u)^2 + 3|x|) dx, split at 0.
  const double c = 8.0 / (4.0 * std::numbers::pi * std::numbers::pi) * std::sqrt(std::numbers::pi / 2.0);
  double prod = 1.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    double v = u[i];
    prod *= c * (std::exp(3.0 * v + 9.0 / 8.0) * normal_cdf(2.0 * v + 1.5) +
                 std::exp(-3.0 * v + 9.0 / 8.0) * normal_cdf(-2.0 * v + 1.5));
  }
  return prod;
}

EstimateReport norm_tail(const SamplerSpec& s, double T, std::size_t n, std::uint64_t seed) {
  return mc_mean(n, seed, [&](Rng& rng) { return draw(s, rng).norm() > T ? 1.0 : 0.0; });
}

double laplace_norm_tail_bound(int k, double T) { return 2.0 * k * std::exp(-T / k); }

EstimateReport l1_mgf(const SamplerSpec& s, double b, std::size_t n, std::uint64_t seed) {
  return mc_mean(n, seed, [&](Rng& rng) { return std::exp(b * draw(s, rng).lpNorm<1>()); });
}

}  // namespace smoothlab
