#include "smoothlab/lab.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace smoothlab;
using nlohmann::json;

namespace {

// Exclusive DIR/.lock for the lifetime of the object.
class DirLock {
 public:
  explicit DirLock(const std::filesystem::path& dir) : path_(dir / ".lock") {
    std::filesystem::create_directories(dir);
    FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) throw ConfigError(dir.string() + ": run directory is locked by another writer (" + path_.string() + ")");
    std::fclose(f);
  }
  ~DirLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string file_stem(std::string s) {
  for (char& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' && ch != '-') ch = '_';
  return s;
}

int finish(const RunReport& r, const std::string& name, const std::string& out_dir) {
  const std::string csv = report_csv_header() + report_csv_rows(r);
  if (!out_dir.empty()) {
    DirLock lock(out_dir);
    const std::filesystem::path base = std::filesystem::path(out_dir) / file_stem(name);
    write_text(base.string() + ".json", to_json(r).dump(2) + "\n");
    write_text(base.string() + ".csv", csv);
  }
  std::cout << csv;
  std::size_t failed = 0;
  for (const auto& m : r.metrics) failed += !m.pass;
  std::cerr << (failed ? "FAIL" : "PASS") << ": " << r.metrics.size() - failed << "/" << r.metrics.size()
            << " metrics pass (" << r.wall_seconds << " s)\n";
  return failed ? 1 : 0;
}

// "--key value" or "--key=value"; values are numbers, comma lists or strings.
json parse_extras(const std::vector<std::string>& extras) {
  json params = json::object();
  auto value_of = [](const std::string& text) -> json {
    if (text.find(',') != std::string::npos) {
      json arr = json::array();
      std::size_t start = 0;
      while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        std::string item = text.substr(start, end - start);
        json v = json::parse(item, nullptr, false);
        arr.push_back(v.is_discarded() ? json(item) : v);
        start = end + 1;
      }
      return arr;
    }
    json v = json::parse(text, nullptr, false);
    return v.is_discarded() ? json(text) : v;
  };
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& a = extras[i];
    if (a.rfind("--", 0) != 0 || a.size() < 3) throw ConfigError("unexpected argument '" + a + "'");
    std::string key = a.substr(2);
    auto eq = key.find('=');
    if (eq != std::string::npos) {
      params[key.substr(0, eq)] = value_of(key.substr(eq + 1));
      continue;
    }
    if (i + 1 >= extras.size()) throw ConfigError("parameter --" + key + " needs a value");
    params[key] = value_of(extras[++i]);
  }
  return params;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smoothlab: smoothed-learning experiments and verification suites"};
  app.require_subcommand(1);
  int jobs_flag = 0;
  app.add_option("--jobs", jobs_flag, "worker threads (falls back to SMOOTHLAB_JOBS, then 1)");

  std::string config_path, out_dir;
  std::uint64_t seed = 1;

  auto* learn = app.add_subcommand("learn", "train on a configured stream and report test error against a comparator");
  learn->add_option("--config", config_path, "JSON config")->required();
  auto* learn_seed = learn->add_option("--seed", seed, "master seed (default: config seed, else 1)");
  learn->add_option("--out", out_dir, "directory for the report JSON and CSV");

  std::string suite;
  auto* verify = app.add_subcommand("verify", "run a verification suite; extra --key value pairs override parameters");
  verify->add_option("id", suite, "suite id")->required();
  verify->add_option("--seed", seed, "master seed");
  verify->add_option("--out", out_dir, "directory for the report JSON and CSV");
  verify->add_option("--config", config_path, "JSON object of suite parameters");
  verify->allow_extras();

  int k = 0;
  double sigma = 0.0;
  std::size_t n = 1000000;
  auto* sq = app.add_subcommand("sq-parity", "parity flip probability under Gaussian perturbation");
  sq->add_option("--k", k, "parity size")->required();
  sq->add_option("--sigma", sigma, "perturbation scale")->required();
  sq->add_option("--n", n, "Monte Carlo draws");
  sq->add_option("--seed", seed, "master seed");
  sq->add_option("--out", out_dir, "directory for the report JSON and CSV");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "aggregate report JSON files into one CSV");
  report->add_option("path", report_dir, "directory of reports")->required();
  report->add_option("--out", out_dir, "directory for report.csv (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_jobs(resolve_jobs(jobs_flag));
    if (*learn) {
      json cfg = load_config(config_path);
      if (!*learn_seed && cfg.contains("seed")) {
        if (!cfg["seed"].is_number_unsigned()) throw ConfigError(config_path + ": seed must be a non-negative integer");
        seed = cfg["seed"].get<std::uint64_t>();
      }
      std::string task = cfg.value("task", std::filesystem::path(config_path).stem().string());
      return finish(cmd_learn(cfg, seed), "learn-" + task + "-seed" + std::to_string(seed), out_dir);
    }
    if (*verify) {
      json params = json::object();
      if (!config_path.empty()) {
        params = load_config(config_path);
        if (!params.is_object()) throw ConfigError(config_path + ": expected a JSON object of parameters");
      }
      const json extras = parse_extras(verify->remaining());
      for (const auto& [key, v] : extras.items()) params[key] = v;
      return finish(cmd_verify(suite, params, seed), "verify-" + suite + "-seed" + std::to_string(seed), out_dir);
    }
    if (*sq) {
      return finish(cmd_sq_parity(k, sigma, n, seed),
                    "sq-parity-k" + std::to_string(k) + "-seed" + std::to_string(seed), out_dir);
    }
    if (*report) {
      std::string csv = cmd_report(report_dir);
      if (out_dir.empty()) {
        std::cout << csv;
      } else {
        DirLock lock(out_dir);
        write_text(std::filesystem::path(out_dir) / "report.csv", csv);
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
