#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <string_view>
#include <vector>

namespace smoothlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Rng = std::mt19937_64;

// sign(0) := +1 throughout the library.
inline int sign(double v) { return v >= 0.0 ? 1 : -1; }

double normal_pdf(double x);
double normal_cdf(double x);

// Substream seeds. derive_seed(master, name) = splitmix64(master ^ fnv1a64(name)),
// derive_seed(master, index) = splitmix64(master + golden * (index + 1)).
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);
std::uint64_t derive_seed(std::uint64_t master, std::string_view name);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Worker threads for sharded Monte Carlo. Results never depend on this
// value: shards have a fixed size and are reduced in index order.
void set_jobs(int n);
int jobs();
// --jobs wins; otherwise SMOOTHLAB_JOBS; otherwise 1.
int resolve_jobs(int cli_value);

inline constexpr std::size_t kShardSize = 8192;

// Runs fn(shard) for shard in [0, n_shards) on jobs() threads.
void parallel_shards(std::size_t n_shards, const std::function<void(std::size_t)>& fn);

struct EstimateReport {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 1;
  std::uint64_t seed = 0;
};

// Mean of fn over n draws with its standard error. Draw i of shard s uses
// an Rng seeded with derive_seed(seed, s).
EstimateReport mc_mean(std::uint64_t n, std::uint64_t seed,
                       const std::function<double(Rng&)>& fn);

// Several means from the same draws: fn fills out[0..k).
std::vector<EstimateReport> mc_means(std::uint64_t n, std::uint64_t seed, std::size_t k,
                                     const std::function<void(Rng&, double* out)>& fn);

Vector standard_normal(Rng& rng, Eigen::Index d);

}  // namespace smoothlab
