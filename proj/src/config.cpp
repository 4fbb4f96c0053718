#include "bridge/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace bridge {

namespace {
void check(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument("config: " + what);
}
}  // namespace

void ExperimentConfig::validate() const {
  check(env == "star" || env == "gridworld", "env must be 'star' or 'gridworld'");
  check(p_succ > 0.0 && p_succ <= 1.0, "p_succ out of (0,1]");
  check(n_offline >= 1, "n_offline must be >= 1");
  check(noise_p >= 0.0 && noise_p <= 1.0, "noise_p out of [0,1]");
  check(T >= 0, "T must be >= 0");
  check(!seeds.empty(), "seeds must be nonempty");
  check(seeds.size() <= 20, "at most 20 seeds per experiment");
  check(embedding == "identity_long" || embedding == "identity_short" ||
            embedding == "state_counts" || embedding == "final_state",
        "unknown embedding kind");
  check(dynamics == "estimated" || dynamics == "known", "dynamics must be estimated|known");
  check(radius_mode == "theoretical" || radius_mode == "fixed",
        "radius_mode must be theoretical|fixed");
  check(radius_value >= 0.0, "radius_value must be >= 0");
  check(gamma_mode == "fixed" || gamma_mode == "theoretical",
        "gamma_mode must be fixed|theoretical");
  check(gamma_value >= 0.0, "gamma_value must be >= 0");
  check(oracle_mode == "deterministic" || oracle_mode == "bt",
        "oracle_mode must be deterministic|bt");
  check(pool_mode == "enumerate" || pool_mode == "sample", "pool_mode must be enumerate|sample");
  check(pool_size >= 1, "pool_size must be >= 1");
  check(algorithm == "bridge" || algorithm == "pbrl" || algorithm == "bc_only",
        "algorithm must be bridge|pbrl|bc_only");
  check(delta > 0.0 && delta < 1.0, "delta out of (0,1)");
  check(lambda > 0.0, "lambda must be > 0");
  check(W > 0.0, "W must be > 0");
  check(selection == "alg1" || selection == "best_vs_random" || selection == "ucb" ||
            selection == "pure_uncertainty",
        "unknown selection mode");
  check(regret_mode == "reward" || regret_mode == "pseudo", "regret_mode must be reward|pseudo");
  check(n_rollouts_per_pair >= 1, "n_rollouts_per_pair must be >= 1");
  check(bonus_rollouts >= 1, "bonus_rollouts must be >= 1");
  check(enumerate_cap >= 1, "enumerate_cap must be >= 1");
  check(gamma_min >= 0.0, "gamma_min must be >= 0");
}

ExperimentConfig config_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  const std::set<std::string> known = {
      "env",         "p_succ",      "n_offline",    "noise_p",      "T",
      "seeds",       "embedding",   "dynamics",     "radius_mode",  "radius_value",
      "gamma_mode",  "gamma_value", "oracle_mode",  "pool_mode",    "pool_size",
      "algorithm",   "delta",       "lambda",       "W",            "selection",
      "regret_mode", "n_rollouts_per_pair", "bonus_rollouts", "master_seed",
      "output_dir",  "enumerate_cap", "gamma_min"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw std::invalid_argument("config: unknown field '" + it.key() + "'");
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("env", c.env);
  get("p_succ", c.p_succ);
  get("n_offline", c.n_offline);
  get("noise_p", c.noise_p);
  get("T", c.T);
  get("seeds", c.seeds);
  get("embedding", c.embedding);
  get("dynamics", c.dynamics);
  get("radius_mode", c.radius_mode);
  get("radius_value", c.radius_value);
  get("gamma_mode", c.gamma_mode);
  get("gamma_value", c.gamma_value);
  get("oracle_mode", c.oracle_mode);
  get("pool_mode", c.pool_mode);
  get("pool_size", c.pool_size);
  get("algorithm", c.algorithm);
  get("delta", c.delta);
  get("lambda", c.lambda);
  get("W", c.W);
  get("selection", c.selection);
  get("regret_mode", c.regret_mode);
  get("n_rollouts_per_pair", c.n_rollouts_per_pair);
  get("bonus_rollouts", c.bonus_rollouts);
  get("master_seed", c.master_seed);
  get("output_dir", c.output_dir);
  get("enumerate_cap", c.enumerate_cap);
  get("gamma_min", c.gamma_min);
  c.validate();
  return c;
}

ExperimentConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["env"] = c.env;
  j["p_succ"] = c.p_succ;
  j["n_offline"] = c.n_offline;
  j["noise_p"] = c.noise_p;
  j["T"] = c.T;
  j["seeds"] = c.seeds;
  j["embedding"] = c.embedding;
  j["dynamics"] = c.dynamics;
  j["radius_mode"] = c.radius_mode;
  j["radius_value"] = c.radius_value;
  j["gamma_mode"] = c.gamma_mode;
  j["gamma_value"] = c.gamma_value;
  j["oracle_mode"] = c.oracle_mode;
  j["pool_mode"] = c.pool_mode;
  j["pool_size"] = c.pool_size;
  j["algorithm"] = c.algorithm;
  j["delta"] = c.delta;
  j["lambda"] = c.lambda;
  j["W"] = c.W;
  j["selection"] = c.selection;
  j["regret_mode"] = c.regret_mode;
  j["n_rollouts_per_pair"] = c.n_rollouts_per_pair;
  j["bonus_rollouts"] = c.bonus_rollouts;
  j["master_seed"] = c.master_seed;
  j["output_dir"] = c.output_dir;
  j["enumerate_cap"] = c.enumerate_cap;
  j["gamma_min"] = c.gamma_min;
  return j.dump();
}

}  // namespace bridge
