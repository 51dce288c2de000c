#include "smoothlab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace smoothlab {

namespace {

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return number(v.get<double>());
  return v.dump();
}

// "id;key=value;..." with keys in sorted order; no commas so it stays one CSV field.
std::string metric_name(const MetricReport& m) {
  std::string s = m.suite_id;
  if (m.params.is_object())
    for (const auto& [k, v] : m.params.items()) {
      std::string val = scalar(v);
      std::replace(val.begin(), val.end(), ',', ' ');
      std::replace(val.begin(), val.end(), '"', '\'');
      s += ";" + k + "=" + val;
    }
  return s;
}

}  // namespace

const char* check_name(Check c) {
  switch (c) {
    case Check::Upper: return "upper";
    case Check::AtMost: return "at_most";
    case Check::AtLeast: return "at_least";
    case Check::Match: return "match";
    case Check::Below: return "below";
    case Check::Exceeds: return "exceeds";
    case Check::Info: return "info";
  }
  return "info";
}

MetricReport judge(const std::string& id, nlohmann::json params, Check check, double estimate, double se, double bound,
                  std::uint64_t n, std::uint64_t seed, double tol) {
  MetricReport r;
  r.suite_id = id;
  if (params.is_null()) params = nlohmann::json::object();
  params["check"] = check_name(check);
  if (check == Check::Match) params["tol"] = tol;
  r.params = std::move(params);
  r.estimate = estimate;
  r.se = se;
  r.bound = bound;
  r.n = n;
  r.seed = seed;
  switch (check) {
    case Check::Upper: r.pass = estimate <= bound + 3.0 * se; break;
    case Check::AtMost: r.pass = estimate <= bound; break;
    case Check::AtLeast: r.pass = estimate >= bound; break;
    case Check::Match: r.pass = std::fabs(estimate - bound) <= tol; break;
    case Check::Below: r.pass = estimate + 3.0 * se < bound; break;
    case Check::Exceeds: r.pass = estimate - 3.0 * se > bound; break;
    case Check::Info: r.pass = true; break;
  }
  // NaN never passes a comparison.
  if (!std::isfinite(estimate) && check != Check::Info) r.pass = false;
  return r;
}

bool RunReport::pass() const {
  return std::all_of(metrics.begin(), metrics.end(), [](const MetricReport& m) { return m.pass; });
}

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& m : r.metrics) metrics.push_back(to_json(m));
  return {{"command", r.command},
          {"config", r.config},
          {"metrics", metrics},
          {"pass", r.pass()},
          {"artifacts", r.artifacts},
          {"wall_seconds", r.wall_seconds},
          {"version", kArtifactVersion}};
}

RunReport run_report_from_json(const nlohmann::json& j) {
  RunReport r;
  r.command = j.at("command").get<std::string>();
  r.config = j.at("config");
  r.wall_seconds = j.value("wall_seconds", 0.0);
  if (j.contains("artifacts")) r.artifacts = j["artifacts"];
  for (const auto& m : j.at("metrics")) {
    MetricReport l;
    l.suite_id = m.at("suite_id").get<std::string>();
    l.params = m.at("params");
    l.estimate = m.at("estimate").get<double>();
    l.se = m.at("se").get<double>();
    l.bound = m.at("bound").get<double>();
    l.pass = m.at("pass").get<bool>();
    l.seed = m.at("seed").get<std::uint64_t>();
    l.n = m.value("n", std::uint64_t{0});
    r.metrics.push_back(std::move(l));
  }
  return r;
}

nlohmann::json parse_config_text(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    auto pos = what.find("syntax error");
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                      (pos == std::string::npos ? what : what.substr(pos)));
  }
}

nlohmann::json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::string config_hash(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

std::string report_csv_header() { return "config_hash,metric,estimate,se,bound,pass,n,seed\n"; }

std::string report_csv_rows(const RunReport& r) {
  const std::string hash = config_hash(r.config);
  std::string out;
  for (const auto& m : r.metrics) {
    out += hash + "," + metric_name(m) + "," + number(m.estimate) + "," + number(m.se) + "," + number(m.bound) + "," +
           (m.pass ? "true" : "false") + "," + std::to_string(m.n) + "," + std::to_string(m.seed) + "\n";
  }
  return out;
}

std::string cmd_report(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(dir))
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string out = report_csv_header();
  for (const auto& f : files) {
    try {
      std::ifstream in(f);
      out += report_csv_rows(run_report_from_json(nlohmann::json::parse(in)));
    } catch (const std::exception& e) {
      std::fprintf(stderr, "warning: skipping %s: %s\n", f.string().c_str(), e.what());
    }
  }
  return out;
}

}  // namespace smoothlab
