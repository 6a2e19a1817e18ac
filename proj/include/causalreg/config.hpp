#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "causalreg/errors.hpp"
#include "causalreg/estimator.hpp"
#include "causalreg/sem.hpp"

namespace causalreg {

/// One archivable artifact per experiment run: every CLI flag overrides one of
/// these keys.
struct ExperimentConfig {
  std::string structure = "benchmark";  // "benchmark" or path to a structure JSON
  double noise_scale = 1.0;
  double shift_scale = 1.0;
  std::vector<long> sample_sizes = {100, 1000, 10000, 100000};
  std::vector<LambdaValue> lambda_grid = default_lambda_grid();

  std::string selector_type = "vfold";  // "vfold" | "split"
  int folds = 5;
  double split_fraction = 0.5;

  int bootstrap_replicates = 100;
  double alpha = 0.05;
  double bootstrap_lambda = 0.3;      // refit model for the interval
  bool bootstrap_use_selector = false;  // run the selector on the training half instead

  int replications = 20;
  std::uint64_t seed = 20240817;
  std::string out_dir = "out";
  int threads = 1;

  double convergence_lambda = 0.2;
  double tau = 1.0;

  long out_of_sample_n = 100000;
  std::vector<double> shift_scales = {100.0, 500.0, 1000.0};
};

namespace detail {

inline std::vector<LambdaValue> parse_lambda_grid(const nlohmann::json& j) {
  std::vector<LambdaValue> grid;
  for (const auto& item : j) {
    if (item.is_string()) {
      if (item.get<std::string>() != "inf") {
        throw ConfigError("lambda grid entries must be numbers or \"inf\"");
      }
      grid.push_back(LambdaValue::infinity());
    } else if (item.is_number()) {
      grid.push_back(LambdaValue::finite(item.get<double>()));
    } else {
      throw ConfigError("lambda grid entries must be numbers or \"inf\"");
    }
  }
  validate_grid(grid);
  return grid;
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    detail::read_if(j, "structure", cfg.structure);
    detail::read_if(j, "noise_scale", cfg.noise_scale);
    detail::read_if(j, "shift_scale", cfg.shift_scale);
    detail::read_if(j, "sample_sizes", cfg.sample_sizes);
    if (j.contains("lambda_grid")) cfg.lambda_grid = detail::parse_lambda_grid(j.at("lambda_grid"));
    if (j.contains("selector")) {
      const auto& s = j.at("selector");
      detail::read_if(s, "type", cfg.selector_type);
      detail::read_if(s, "folds", cfg.folds);
      detail::read_if(s, "split_fraction", cfg.split_fraction);
    }
    if (j.contains("bootstrap")) {
      const auto& b = j.at("bootstrap");
      detail::read_if(b, "replicates", cfg.bootstrap_replicates);
      detail::read_if(b, "alpha", cfg.alpha);
      detail::read_if(b, "lambda", cfg.bootstrap_lambda);
      detail::read_if(b, "use_selector", cfg.bootstrap_use_selector);
    }
    detail::read_if(j, "replications", cfg.replications);
    detail::read_if(j, "seed", cfg.seed);
    detail::read_if(j, "out_dir", cfg.out_dir);
    detail::read_if(j, "threads", cfg.threads);
    if (j.contains("convergence")) {
      const auto& c = j.at("convergence");
      detail::read_if(c, "lambda", cfg.convergence_lambda);
      detail::read_if(c, "tau", cfg.tau);
    }
    if (j.contains("compare")) {
      const auto& c = j.at("compare");
      detail::read_if(c, "out_of_sample_n", cfg.out_of_sample_n);
      detail::read_if(c, "shift_scales", cfg.shift_scales);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (cfg.noise_scale < 0 || cfg.shift_scale < 0) throw ConfigError("covariance scales must be >= 0");
  if (cfg.sample_sizes.empty()) throw ConfigError("sample_sizes must be non-empty");
  for (long n : cfg.sample_sizes) {
    if (n < 4) throw ConfigError("sample sizes must be >= 4");
  }
  if (cfg.selector_type != "vfold" && cfg.selector_type != "split") {
    throw ConfigError("selector type must be 'vfold' or 'split'");
  }
  if (cfg.folds < 2) throw ConfigError("folds must be >= 2");
  if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0)) {
    throw ConfigError("split_fraction must lie in (0, 1)");
  }
  if (cfg.bootstrap_replicates < 1) throw ConfigError("bootstrap replicates must be >= 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (cfg.bootstrap_lambda < 0.0) throw ConfigError("bootstrap lambda must be >= 0");
  if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  if (cfg.convergence_lambda < 0.0) throw ConfigError("convergence lambda must be >= 0");
  if (cfg.tau < 0.0) throw ConfigError("tau must be >= 0");
  if (cfg.out_of_sample_n < 4) throw ConfigError("out_of_sample_n must be >= 4");
  if (cfg.shift_scales.empty()) throw ConfigError("shift_scales must be non-empty");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

/// Loads a structure from JSON: {"beta_pa": [...], "beta_ch": [...],
/// "b_x": [[...], ...]}.
inline SemStructure load_structure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open structure file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("structure parse error: ") + e.what());
  }
  try {
    const auto pa = j.at("beta_pa").get<std::vector<double>>();
    const auto ch = j.at("beta_ch").get<std::vector<double>>();
    const auto bx = j.at("b_x").get<std::vector<std::vector<double>>>();
    const auto p = static_cast<int>(pa.size());
    if (static_cast<int>(ch.size()) != p || static_cast<int>(bx.size()) != p) {
      throw ConfigError("structure: dimensions of beta_pa, beta_ch, b_x disagree");
    }
    SemStructure s;
    s.beta_pa = Eigen::Map<const Eigen::VectorXd>(pa.data(), p);
    s.beta_ch = Eigen::Map<const Eigen::VectorXd>(ch.data(), p);
    s.b_x.resize(p, p);
    for (int i = 0; i < p; ++i) {
      if (static_cast<int>(bx[static_cast<std::size_t>(i)].size()) != p) {
        throw ConfigError("structure: b_x is not square");
      }
      for (int k = 0; k < p; ++k) s.b_x(i, k) = bx[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    return validate_structure(s);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("structure: ") + e.what());
  }
}

inline SemStructure structure_from_config(const ExperimentConfig& cfg) {
  if (cfg.structure == "benchmark") return benchmark_structure();
  return load_structure(cfg.structure);
}

}  // namespace causalreg
