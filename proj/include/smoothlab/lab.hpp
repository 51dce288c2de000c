#pragma once

#include "smoothlab/learner.hpp"
#include "smoothlab/smoothing.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace smoothlab {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Bad or unreadable configuration; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// How a metric's estimate is judged against its bound (stored as params["check"]):
//   upper    estimate <= bound + 3 se        at_most   estimate <= bound
//   at_least estimate >= bound               match     |estimate - bound| <= params["tol"]
//   below    estimate + 3 se < bound         exceeds   estimate - 3 se > bound
//   info     always passes
enum class Check { Upper, AtMost, AtLeast, Match, Below, Exceeds, Info };
const char* check_name(Check c);

// Builds one metric row and evaluates it.
MetricReport judge(const std::string& id, nlohmann::json params, Check check, double estimate, double se, double bound,
                  std::uint64_t n, std::uint64_t seed, double tol = 0.0);

struct RunReport {
  std::string command;
  nlohmann::json config;
  std::vector<MetricReport> metrics;
  nlohmann::json artifacts;  // e.g. the learned hypothesis
  double wall_seconds = 0.0;
  bool pass() const;
};

nlohmann::json to_json(const RunReport& r);
RunReport run_report_from_json(const nlohmann::json& j);

// JSON parse with "source:line:column: message" errors.
nlohmann::json parse_config_text(const std::string& text, const std::string& source);
nlohmann::json load_config(const std::filesystem::path& path);

// Verification suites by id: numbered ids first, then the named suites.
const std::vector<std::string>& suite_ids();
bool has_suite(const std::string& id);
// Unknown ids throw ConfigError listing the available ones.
RunReport cmd_verify(const std::string& id, const nlohmann::json& params, std::uint64_t seed);

// E_{x, z} Pr[chi_S(x + sigma z) != chi_S(x)] on the hypercube against k Phi(-1/sigma).
RunReport cmd_sq_parity(int k, double sigma, std::size_t n, std::uint64_t seed);

// Trains on the configured stream, evaluates fresh test data and a comparator.
RunReport cmd_learn(const nlohmann::json& config, std::uint64_t seed);

// 16 hex digits of FNV-1a over the compact config dump.
std::string config_hash(const nlohmann::json& config);
std::string report_csv_header();
std::string report_csv_rows(const RunReport& r);
// Aggregates every *.json report in dir (name order); malformed files are skipped with a warning.
std::string cmd_report(const std::filesystem::path& dir);

}  // namespace smoothlab
