#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bridge {

// One experiment description; maps 1:1 onto the JSON config files.
struct ExperimentConfig {
  std::string env = "star";
  double p_succ = 0.8;  // gridworld move success probability
  int n_offline = 2;
  double noise_p = 0.0;
  int T = 100;
  std::vector<int> seeds = {1,  2,  3,  4,  5,  6,  7,  8,  9,  10,
                            11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  std::string embedding = "identity_short";
  std::string dynamics = "estimated";        // estimated | known
  std::string radius_mode = "theoretical";   // theoretical | fixed
  double radius_value = 1.0;                 // used when radius_mode == fixed
  std::string gamma_mode = "fixed";          // fixed | theoretical
  double gamma_value = 1.0;
  std::string oracle_mode = "deterministic";  // deterministic | bt
  std::string pool_mode = "enumerate";        // enumerate | sample
  long long pool_size = 1000;
  std::string algorithm = "bridge";  // bridge | pbrl | bc_only
  double delta = 0.1;
  double lambda = 1.0;
  double W = 1.0;
  std::string selection = "alg1";  // alg1 | best_vs_random | ucb | pure_uncertainty
  std::string regret_mode = "reward";  // reward | pseudo
  int n_rollouts_per_pair = 1;
  int bonus_rollouts = 1;
  std::uint64_t master_seed = 12345;
  std::string output_dir = "out";
  long long enumerate_cap = 1000000;
  double gamma_min = 0.0;  // 0 -> derive from the expert occupancy

  void validate() const;  // throws std::invalid_argument with a reason
};

ExperimentConfig config_from_json_file(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

}  // namespace bridge
