#include "smoothlab/core.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>
#include <vector>

namespace smoothlab {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view name) {
  return splitmix64(master ^ fnv1a64(name));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + 0x9e3779b97f4a7c15ULL * (index + 1));
}

namespace {
std::atomic<int> g_jobs{1};
}

void set_jobs(int n) { g_jobs = n < 1 ? 1 : n; }
int jobs() { return g_jobs; }

int resolve_jobs(int cli_value) {
  if (cli_value > 0) return cli_value;
  if (const char* env = std::getenv("SMOOTHLAB_JOBS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

void parallel_shards(std::size_t n_shards, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs()), n_shards);
  if (workers <= 1) {
    for (std::size_t s = 0; s < n_shards; ++s) fn(s);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t s = next++; s < n_shards; s = next++) fn(s);
    });
  }
  for (auto& t : pool) t.join();
}

std::vector<EstimateReport> mc_means(std::uint64_t n, std::uint64_t seed, std::size_t k,
                                     const std::function<void(Rng&, double* out)>& fn) {
  std::vector<EstimateReport> r(k);
  for (auto& e : r) {
    e.seed = seed;
    e.n_samples = n;
  }
  if (n == 0) {
    for (auto& e : r) e.n_samples = 1;
    return r;
  }
  std::size_t n_shards = (n + kShardSize - 1) / kShardSize;
  // Per shard and component: sum and centered sum of squares.
  std::vector<double> sums(n_shards * k, 0.0), m2s(n_shards * k, 0.0);
  parallel_shards(n_shards, [&](std::size_t s) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    std::uint64_t lo = s * kShardSize;
    std::uint64_t hi = std::min<std::uint64_t>(n, lo + kShardSize);
    std::vector<double> v(k), shift(k), a(k, 0.0), b(k, 0.0);
    for (std::uint64_t i = lo; i < hi; ++i) {
      fn(rng, v.data());
      if (i == lo) shift = v;
      for (std::size_t c = 0; c < k; ++c) {
        double d = v[c] - shift[c];
        a[c] += d;
        b[c] += d * d;
      }
    }
    double cnt = static_cast<double>(hi - lo);
    for (std::size_t c = 0; c < k; ++c) {
      sums[s * k + c] = a[c] + shift[c] * cnt;
      m2s[s * k + c] = b[c] - a[c] * a[c] / cnt;
    }
  });
  for (std::size_t c = 0; c < k; ++c) {
    double total = 0.0;
    for (std::size_t s = 0; s < n_shards; ++s) total += sums[s * k + c];
    double mean = total / static_cast<double>(n);
    double m2 = 0.0;
    for (std::size_t s = 0; s < n_shards; ++s) {
      std::uint64_t lo = s * kShardSize;
      double cnt = static_cast<double>(std::min<std::uint64_t>(n, lo + kShardSize) - lo);
      double d = sums[s * k + c] / cnt - mean;
      m2 += m2s[s * k + c] + cnt * d * d;
    }
    r[c].estimate = mean;
    r[c].std_error = n > 1 ? std::sqrt(std::max(0.0, m2) / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  }
  return r;
}

EstimateReport mc_mean(std::uint64_t n, std::uint64_t seed,
                       const std::function<double(Rng&)>& fn) {
  return mc_means(n, seed, 1, [&](Rng& rng, double* out) { out[0] = fn(rng); })[0];
}

Vector standard_normal(Rng& rng, Eigen::Index d) {
  std::normal_distribution<double> g;
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = g(rng);
  return z;
}

}  // namespace smoothlab
