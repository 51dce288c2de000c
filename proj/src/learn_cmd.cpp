#include "smoothlab/lab.hpp"

#include <chrono>
#include <cmath>
#include <set>

namespace smoothlab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void only_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) fail(path + "." + k, "unknown key");
}

const json& need(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) fail(path + "." + key, "missing");
  return obj[key];
}

double number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = need(obj, key, path);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& key, const std::string& path, double def) {
  return obj.contains(key) ? number(obj, key, path) : def;
}

std::size_t positive(const json& obj, const std::string& key, const std::string& path) {
  double v = number(obj, key, path);
  if (v < 1 || v != std::floor(v)) fail(path + "." + key, "expected a positive integer");
  return static_cast<std::size_t>(v);
}

// Wraps a library parse so its message carries the config path.
template <class F>
auto at_path(const std::string& path, F f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

// A number, or {"gamma", "k", "eps"} for gamma / sqrt(2 ln(2k / eps)).
double sigma_value(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  only_keys(v, path, {"gamma", "k", "eps"});
  double gamma = number(v, "gamma", path), k = number(v, "k", path), eps = number(v, "eps", path);
  if (gamma <= 0 || k < 1 || eps <= 0 || 2.0 * k / eps <= 1.0) fail(path, "needs gamma > 0, k >= 1, 0 < eps < 2k");
  return gamma / std::sqrt(2.0 * std::log(2.0 * k / eps));
}

LearnerConfig learner_config(const json& j, const std::string& path) {
  only_keys(j, path, {"degree", "proj_dim", "n_train", "repetitions", "validation_n", "sigma", "irls"});
  LearnerConfig cfg;
  cfg.degree = static_cast<int>(positive(j, "degree", path));
  if (j.contains("proj_dim") && !j["proj_dim"].is_null()) cfg.proj_dim = static_cast<int>(positive(j, "proj_dim", path));
  cfg.n_train = positive(j, "n_train", path);
  cfg.repetitions = j.contains("repetitions") ? static_cast<int>(positive(j, "repetitions", path)) : 1;
  cfg.validation_n = j.contains("validation_n") ? positive(j, "validation_n", path) : cfg.validation_n;
  if (j.contains("sigma")) cfg.sigma = sigma_value(j["sigma"], path + ".sigma");
  if (j.contains("irls")) {
    const json& o = j["irls"];
    const std::string p = path + ".irls";
    only_keys(o, p, {"eps_start", "eps_end", "max_iter_per_stage", "ridge"});
    cfg.irls.eps_start = number_or(o, "eps_start", p, cfg.irls.eps_start);
    cfg.irls.eps_end = number_or(o, "eps_end", p, cfg.irls.eps_end);
    if (o.contains("max_iter_per_stage")) cfg.irls.max_iter_per_stage = static_cast<int>(positive(o, "max_iter_per_stage", p));
    cfg.irls.ridge = number_or(o, "ridge", p, cfg.irls.ridge);
  }
  at_path(path, [&] {
    validate(cfg);
    return 0;
  });
  return cfg;
}

}  // namespace

RunReport cmd_learn(const nlohmann::json& config, std::uint64_t seed) {
  const std::string root = "config";
  only_keys(config, root,
            {"task", "seed", "concept", "sampler", "label_model", "margin", "learner", "test_n", "comparator",
             "max_test_error", "max_gap", "test_error_range"});
  auto t0 = std::chrono::steady_clock::now();

  Concept c = at_path(root + ".concept", [&] { return concept_from_json(need(config, "concept", root)); });
  SamplerSpec sampler = at_path(root + ".sampler", [&] { return sampler_from_json(need(config, "sampler", root)); });
  if (dim(sampler) != c.ambient_dim)
    fail(root + ".sampler", "dimension " + std::to_string(dim(sampler)) + " does not match the concept's " +
                                std::to_string(c.ambient_dim));
  LabelModel labels = config.contains("label_model")
                          ? at_path(root + ".label_model", [&] { return label_model_from_json(config["label_model"], c); })
                          : LabelModel::clean(c);
  double margin = number_or(config, "margin", root, 0.0);
  if (margin < 0) fail(root + ".margin", "must be >= 0");
  LearnerConfig cfg = learner_config(need(config, "learner", root), root + ".learner");
  std::size_t test_n = config.contains("test_n") ? positive(config, "test_n", root) : 10000;

  json comparator = config.value("comparator", json{{"kind", "err"}});
  const std::string cpath = root + ".comparator";
  only_keys(comparator, cpath, {"kind", "sigma", "gamma", "n_z"});
  if (!comparator.contains("kind") || !comparator["kind"].is_string()) fail(cpath + ".kind", "missing");
  const std::string kind = comparator["kind"];
  if (kind != "err" && kind != "opt_sigma" && kind != "margin_err")
    fail(cpath + ".kind", "expected err, opt_sigma or margin_err");
  double comp_sigma = 0.0, comp_gamma = 0.0;
  std::size_t n_z = 100;
  if (kind == "opt_sigma") {
    comp_sigma = sigma_value(need(comparator, "sigma", cpath), cpath + ".sigma");
    if (comparator.contains("n_z")) n_z = positive(comparator, "n_z", cpath);
  }
  if (kind == "margin_err") {
    comp_gamma = number(comparator, "gamma", cpath);
    if (!has_exact_distance(c)) fail(cpath, "margin_err needs a concept with exact boundary distances");
  }

  auto stream = make_stream(sampler, labels, margin);
  LearnResult res = at_path(root + ".learner", [&] { return learn(stream, cfg, seed); });
  const std::uint64_t test_seed = derive_seed(seed, "test");
  Dataset test = stream(test_n, test_seed);
  const double err = empirical_01(res.hypothesis, test);
  const double n = static_cast<double>(test_n);
  const double err_se = std::sqrt(err * (1.0 - err) / n);

  EstimateReport comp;
  comp.n_samples = test_n;
  comp.seed = test_seed;
  if (kind == "opt_sigma") {
    comp = opt_sigma_term(c, test, comp_sigma, n_z, derive_seed(seed, "comparator"));
  } else {
    std::size_t wrong = 0;
    if (kind == "err") {
      for (std::size_t i = 0; i < test.y.size(); ++i)
        wrong += eval(c, test.X.row(static_cast<Eigen::Index>(i)).transpose()) != test.y[i];
      comp.estimate = static_cast<double>(wrong) / n;
    } else {
      comp.estimate = margin_err_term(c, test, comp_gamma);
    }
    comp.std_error = std::sqrt(comp.estimate * (1.0 - comp.estimate) / n);
  }

  RunReport r;
  r.command = "learn";
  r.config = config;
  r.config["seed"] = seed;
  const json base = {{"comparator", kind}};
  auto with = [&](const char* key, json extra = json::object()) {
    json p = base;
    p["kind"] = key;
    for (const auto& [k, v] : extra.items()) p[k] = v;
    return p;
  };
  auto opt_check = [&](const char* key) { return config.contains(key) ? Check::AtMost : Check::Info; };
  const double max_err = number_or(config, "max_test_error", root, 1.0);
  const double max_gap = number_or(config, "max_gap", root, 1.0);

  r.metrics.push_back(judge("learn", with("test_error"), opt_check("max_test_error"), err, err_se, max_err, test_n, test_seed));
  json cp = with("comparator");
  if (kind == "opt_sigma") cp["sigma"] = comp_sigma;
  if (kind == "margin_err") cp["gamma"] = comp_gamma;
  r.metrics.push_back(judge("learn", cp, Check::Info, comp.estimate, comp.std_error, 0.0, comp.n_samples, comp.seed));
  r.metrics.push_back(judge("learn", with("gap"), opt_check("max_gap"), err - comp.estimate,
                            std::hypot(err_se, comp.std_error), max_gap, test_n, test_seed));
  if (config.contains("test_error_range")) {
    const json& range = config["test_error_range"];
    if (!range.is_array() || range.size() != 2 || !range[0].is_number() || !range[1].is_number())
      fail(root + ".test_error_range", "expected [lo, hi]");
    r.metrics.push_back(judge("learn", with("test_error_low"), Check::AtLeast, err, err_se, range[0].get<double>(),
                              test_n, test_seed));
    r.metrics.push_back(judge("learn", with("test_error_high"), Check::AtMost, err, err_se, range[1].get<double>(),
                              test_n, test_seed));
  }
  const std::uint64_t val_seed = derive_seed(seed, "validation");
  for (std::size_t i = 0; i < res.validation_errors.size(); ++i) {
    double v = res.validation_errors[i];
    r.metrics.push_back(judge("learn", with("validation_error", {{"repetition", i}}), Check::Info, v,
                              std::sqrt(v * (1.0 - v) / static_cast<double>(cfg.validation_n)), 0.0, cfg.validation_n,
                              val_seed));
  }
  r.artifacts = {{"hypothesis", to_json(res.hypothesis)},
                 {"chosen_repetition", res.chosen},
                 {"underdetermined", res.underdetermined},
                 {"train_objectives", res.train_objectives},
                 {"test_flip_rate", test.achieved_flip_rate}};
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace smoothlab
