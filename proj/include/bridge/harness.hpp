#pragma once

#include <string>
#include <vector>

#include "bridge/config.hpp"
#include "bridge/online.hpp"

namespace bridge {

struct AggregateResult {
  int n_seeds = 0;
  std::vector<int> t;
  std::vector<double> mean_cum_regret, cum_ci_lo, cum_ci_hi;
  std::vector<double> mean_pi_size, pi_ci_lo, pi_ci_hi;
  std::vector<double> mean_best_policy_regret;
  double mean_final_cum_regret = 0.0;
  double mean_final_best_regret = 0.0;
  double mean_bc_regret = 0.0;
  std::vector<int> completed_seeds;
  std::vector<int> failed_seeds;
  std::vector<RunResult> runs;  // one per completed seed, in seed order
};

// Deterministic per-seed dataset: n_offline expert rollouts, then action
// corruption at rate noise_p.  Streams derive from (master_seed, seed).
OfflineDataset make_dataset(const TabularMDP& env, const DeterministicPolicy& expert,
                            const ExperimentConfig& config, int seed);

// Runs all seeds (isolated failures), writes one CSV per seed into
// config.output_dir plus an aggregate CSV recomputed from the per-seed files.
AggregateResult run_experiment(const ExperimentConfig& config);

// Rebuild aggregate.csv purely from the per-seed CSVs in the directory;
// byte-identical to the file run_experiment wrote.
std::string aggregate_from_files(const std::string& dir, const ExperimentConfig& config);

struct Table1Cell {
  int n = 0;
  double noise = 0.0;
  double mean_fraction = 0.0;
  double std_fraction = 0.0;
  int runs = 0;
};

// (n in {10,20,40,80,1000}) x (noise in {0, 0.1, 0.2}) candidate-fraction
// table; writes table1.csv into base.output_dir.
std::vector<Table1Cell> run_table1_sweep(const ExperimentConfig& base, int runs_per_cell);

struct RadiusAblationEntry {
  double radius = 0.0;
  AggregateResult aggregate;
  std::vector<int> expert_survived;  // 0/1 per completed seed
  double survival_rate = 0.0;
};

std::vector<RadiusAblationEntry> run_radius_ablation(const ExperimentConfig& base,
                                                     const std::vector<double>& radius_values);

// Deterministic float formatting shared by all CSV writers.
std::string fmt(double v);

}  // namespace bridge
