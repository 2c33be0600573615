#pragma once

// JSON run configuration. Every key is optional; unknown keys are rejected.
//
//   {
//     "algorithm": "batch-balance",  "B": 10, "K": 100, "M": 10000,
//     "beta": 1.0, "enumeration_threshold": 4, "dispatch_threshold": 50,
//     "subsample_factor": 2.0, "max_cluster_iters": 5, "seed": 0,
//     "tau_mode": "annealed", "tau_divisor": 4.0, "tau": 0.0, "epsilon": 0.0,
//     "budget": 0, "policy": "ec-aware", "sigma": 0.125, "target": 63,
//     "kappa": 5.0
//   }

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "balance/algorithms.hpp"
#include "balance/ensemble.hpp"
#include "balance/error.hpp"
#include "balance/selection.hpp"

namespace balance {

struct RunConfig {
  Algorithm algorithm = Algorithm::batch_balance;
  SelectionConfig selection;
  TauSchedule tau;
  double epsilon = 0.0;  // validation error rate used by `select`
  std::size_t budget = 0;
  std::string policy = "ec-aware";
  double sigma = 0.125;
  std::optional<std::size_t> target;
  double kappa = 5.0;  // synthetic ensemble concentration

  void validate() const {
    selection.validate();
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0,1]");
    if (tau.mode == TauSchedule::Mode::annealed && !(tau.divisor > 0.0)) throw ConfigError("tau_divisor must be > 0");
    if (tau.mode == TauSchedule::Mode::fixed && !(tau.fixed_value >= 0.0 && tau.fixed_value <= 1.0)) {
      throw ConfigError("tau must lie in [0,1]");
    }
    if (budget != 0 && budget < selection.batch_size) throw ConfigError("budget must be 0 or >= B");
    if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("sigma must lie in (0,1)");
    if (!(kappa > 0.0)) throw ConfigError("kappa must be > 0");
  }
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "algorithm", "B", "K", "M", "beta", "enumeration_threshold", "dispatch_threshold",
      "subsample_factor", "max_cluster_iters", "seed", "tau_mode", "tau_divisor", "tau",
      "epsilon", "budget", "policy", "sigma", "target", "kappa"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig config;
  try {
    if (j.contains("algorithm")) config.algorithm = parse_algorithm(j["algorithm"].get<std::string>());
    auto& sel = config.selection;
    sel.batch_size = j.value("B", sel.batch_size);
    sel.num_pairs = j.value("K", sel.num_pairs);
    sel.num_config_samples = j.value("M", sel.num_config_samples);
    sel.coldness = j.value("beta", sel.coldness);
    sel.enumeration_threshold = j.value("enumeration_threshold", sel.enumeration_threshold);
    sel.dispatch_threshold = j.value("dispatch_threshold", sel.dispatch_threshold);
    sel.subsample_factor = j.value("subsample_factor", sel.subsample_factor);
    sel.max_cluster_iters = j.value("max_cluster_iters", sel.max_cluster_iters);
    sel.seed = j.value("seed", sel.seed);
    const std::string mode = j.value("tau_mode", std::string("annealed"));
    if (mode == "annealed") {
      config.tau.mode = TauSchedule::Mode::annealed;
    } else if (mode == "fixed") {
      config.tau.mode = TauSchedule::Mode::fixed;
    } else {
      throw ConfigError("tau_mode must be 'annealed' or 'fixed'");
    }
    config.tau.divisor = j.value("tau_divisor", config.tau.divisor);
    config.tau.fixed_value = j.value("tau", config.tau.fixed_value);
    config.epsilon = j.value("epsilon", config.epsilon);
    config.budget = j.value("budget", config.budget);
    config.policy = j.value("policy", config.policy);
    config.sigma = j.value("sigma", config.sigma);
    if (j.contains("target")) config.target = j["target"].get<std::size_t>();
    config.kappa = j.value("kappa", config.kappa);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  config.validate();
  return config;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(file);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace balance
