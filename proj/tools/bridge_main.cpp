#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bridge/harness.hpp"
#include "bridge/hellinger.hpp"

using namespace bridge;

int main(int argc, char** argv) {
  CLI::App app{"Offline-to-online preference-based RL for tabular MDPs"};
  app.require_subcommand(1);

  std::string config_path, env_name = "star", policy_a, policy_b, values_csv, runs_dir;
  int runs_per_cell = 30;
  double p_succ = 0.8;

  auto* run_cmd = app.add_subcommand("run", "Run one experiment from a JSON config");
  run_cmd->add_option("--config", config_path, "JSON config file")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Parameter sweeps");
  auto* table1_cmd = sweep_cmd->add_subcommand("table1", "Confidence-set scaling table");
  table1_cmd->add_option("--config", config_path, "JSON config file")->required();
  table1_cmd->add_option("--runs", runs_per_cell, "Statistical runs per cell");
  auto* radius_cmd = sweep_cmd->add_subcommand("radius", "Radius ablation");
  radius_cmd->add_option("--config", config_path, "JSON config file")->required();
  radius_cmd->add_option("--values", values_csv, "Comma-separated radius values")->required();
  sweep_cmd->require_subcommand(1);

  auto* hellinger_cmd =
      app.add_subcommand("hellinger", "Squared Hellinger distance between two policies");
  hellinger_cmd->add_option("--env", env_name, "Environment name (star|gridworld)")->required();
  hellinger_cmd->add_option("--policy-a", policy_a, "Policy file (one action per line)")->required();
  hellinger_cmd->add_option("--policy-b", policy_b, "Policy file (one action per line)")->required();
  hellinger_cmd->add_option("--p-succ", p_succ, "Gridworld success probability");

  auto* env_cmd = app.add_subcommand("env-info", "Print environment tables as CSV");
  env_cmd->add_option("name", env_name, "Environment name")->required();
  env_cmd->add_option("--p-succ", p_succ, "Gridworld success probability");

  auto* validate_cmd = app.add_subcommand("validate", "Validate a JSON config");
  validate_cmd->add_option("--config", config_path, "JSON config file")->required();

  auto* agg_cmd = app.add_subcommand("aggregate", "Rebuild aggregate.csv from per-seed CSVs");
  agg_cmd->add_option("--config", config_path, "JSON config file")->required();
  agg_cmd->add_option("--dir", runs_dir, "Directory with per-seed CSVs")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      ExperimentConfig config = config_from_json_file(config_path);
      AggregateResult agg = run_experiment(config);
      std::cout << "completed_seeds=" << agg.n_seeds
                << " failed_seeds=" << agg.failed_seeds.size() << '\n';
      std::cout << "mean_bc_regret=" << fmt(agg.mean_bc_regret) << '\n';
      if (config.algorithm != "bc_only") {
        std::cout << "mean_final_cum_regret=" << fmt(agg.mean_final_cum_regret) << '\n';
        std::cout << "mean_final_best_regret=" << fmt(agg.mean_final_best_regret) << '\n';
      }
      std::cout << "outputs in " << config.output_dir << '\n';
    } else if (table1_cmd->parsed()) {
      ExperimentConfig config = config_from_json_file(config_path);
      auto cells = run_table1_sweep(config, runs_per_cell);
      for (const auto& c : cells)
        std::cout << "n=" << c.n << " noise=" << fmt(c.noise) << " fraction="
                  << fmt(c.mean_fraction) << " +/- " << fmt(c.std_fraction) << '\n';
      std::cout << "table written to " << config.output_dir << "/table1.csv\n";
    } else if (radius_cmd->parsed()) {
      ExperimentConfig config = config_from_json_file(config_path);
      std::vector<double> values;
      std::stringstream ss(values_csv);
      std::string item;
      while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
      auto entries = run_radius_ablation(config, values);
      for (const auto& e : entries)
        std::cout << "radius=" << fmt(e.radius) << " survival=" << fmt(e.survival_rate)
                  << " mean_final_cum_regret=" << fmt(e.aggregate.mean_final_cum_regret) << '\n';
    } else if (hellinger_cmd->parsed()) {
      TabularMDP env = build_env(env_name, p_succ);
      DeterministicPolicy a = load_policy(policy_a);
      DeterministicPolicy b = load_policy(policy_b);
      if (static_cast<int>(a.size()) != env.n_states || static_cast<int>(b.size()) != env.n_states)
        throw std::invalid_argument("policy length does not match environment");
      double h2 = squared_hellinger(env.transitions, a, env.transitions, b, env.initial_dist,
                                    env.horizon);
      std::cout << fmt(h2) << '\n';
    } else if (env_cmd->parsed()) {
      TabularMDP env = build_env(env_name, p_succ);
      std::cout << "n_states," << env.n_states << "\nn_actions," << env.n_actions << "\nhorizon,"
                << env.horizon << '\n';
      std::cout << "state,reward,initial_prob\n";
      for (int s = 0; s < env.n_states; ++s)
        std::cout << s << ',' << fmt(env.rewards[s]) << ',' << fmt(env.initial_dist[s]) << '\n';
      std::cout << "s,a,s_next,prob\n";
      for (int s = 0; s < env.n_states; ++s)
        for (int a = 0; a < env.n_actions; ++a)
          for (int s2 = 0; s2 < env.n_states; ++s2)
            if (env.transitions.at(s, a, s2) > 0.0)
              std::cout << s << ',' << a << ',' << s2 << ',' << fmt(env.transitions.at(s, a, s2))
                        << '\n';
    } else if (validate_cmd->parsed()) {
      ExperimentConfig config = config_from_json_file(config_path);
      std::cout << "config ok\n" << config_to_json(config) << '\n';
    } else if (agg_cmd->parsed()) {
      ExperimentConfig config = config_from_json_file(config_path);
      std::string text = aggregate_from_files(runs_dir, config);
      std::cout << text;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
