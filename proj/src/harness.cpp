#include "bridge/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bridge/hellinger.hpp"

namespace fs = std::filesystem;

namespace bridge {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

OfflineDataset make_dataset(const TabularMDP& env, const DeterministicPolicy& expert,
                            const ExperimentConfig& config, int seed) {
  OfflineDataset dataset;
  dataset.horizon = env.horizon;
  Rng ds_rng = seed_stream(config.master_seed, static_cast<std::uint64_t>(seed), "dataset");
  for (int i = 0; i < config.n_offline; ++i)
    dataset.trajectories.push_back(sample_trajectory(env, expert, ds_rng));
  if (config.noise_p > 0.0) {
    Rng noise_rng = seed_stream(config.master_seed, static_cast<std::uint64_t>(seed), "noise");
    dataset = corrupt_dataset(dataset, config.noise_p, env.n_actions, noise_rng);
  }
  return dataset;
}

namespace {

std::string seed_csv_path(const std::string& dir, int seed) {
  return dir + "/seed_" + std::to_string(seed) + ".csv";
}

void write_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << content;
  }
  fs::rename(tmp, path);
}

std::string seed_csv_text(const ExperimentConfig& config, int seed, const RunResult& run) {
  std::ostringstream out;
  out << "# config " << config_to_json(config) << '\n';
  out << "# bc_regret " << fmt(run.bc_regret) << '\n';
  if (config.algorithm == "bc_only") {
    out << "seed,bc_regret\n" << seed << ',' << fmt(run.bc_regret) << '\n';
    return out.str();
  }
  out << "# final_best_regret " << fmt(run.final_best_regret) << '\n';
  out << "# radius " << fmt(run.radius) << '\n';
  out << "# n_candidates " << run.n_candidates << '\n';
  out << "seed,t,pi_t_size,pair_i,pair_j,outcome,inst_regret,cum_regret,best_policy_regret,"
         "bonus_1,bonus_2,gamma\n";
  for (const auto& r : run.records) {
    out << r.seed << ',' << r.t << ',' << r.pi_t_size << ',' << r.pair_i << ',' << r.pair_j << ','
        << r.outcome << ',' << fmt(r.inst_regret) << ',' << fmt(r.cum_regret) << ','
        << fmt(r.best_policy_regret) << ',' << fmt(r.bonus_1) << ',' << fmt(r.bonus_2) << ','
        << fmt(r.gamma) << '\n';
  }
  return out.str();
}

struct ParsedSeedFile {
  double bc_regret = 0.0;
  double final_best_regret = 0.0;
  std::vector<int> t, pi_size;
  std::vector<double> cum, best;
};

ParsedSeedFile parse_seed_csv(const std::string& path, bool online) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  ParsedSeedFile parsed;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# bc_regret ", 0) == 0) parsed.bc_regret = std::stod(line.substr(12));
    if (line.rfind("# final_best_regret ", 0) == 0)
      parsed.final_best_regret = std::stod(line.substr(20));
    if (!line.empty() && line[0] != '#' && line.find("seed,") == 0) break;  // column header
  }
  if (!online) return parsed;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 12) throw std::runtime_error("bad row in " + path);
    parsed.t.push_back(std::stoi(fields[1]));
    parsed.pi_size.push_back(std::stoi(fields[2]));
    parsed.cum.push_back(std::stod(fields[7]));
    parsed.best.push_back(std::stod(fields[8]));
  }
  return parsed;
}

void mean_ci(const std::vector<double>& values, double& mean, double& lo, double& hi) {
  int n = static_cast<int>(values.size());
  mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  double half = 1.96 * sd / std::sqrt(static_cast<double>(n));
  lo = mean - half;
  hi = mean + half;
}

}  // namespace

std::string aggregate_from_files(const std::string& dir, const ExperimentConfig& config) {
  bool online = config.algorithm != "bc_only";
  std::vector<int> completed, failed;
  std::vector<ParsedSeedFile> parsed;
  for (int seed : config.seeds) {
    std::string path = seed_csv_path(dir, seed);
    if (fs::exists(path)) {
      parsed.push_back(parse_seed_csv(path, online));
      completed.push_back(seed);
    } else {
      failed.push_back(seed);
    }
  }
  std::ostringstream out;
  out << "# config " << config_to_json(config) << '\n';
  out << "# ci mean +/- 1.96*std/sqrt(n_seeds)\n";
  out << "# seeds_completed " << completed.size() << '\n';
  if (!failed.empty()) {
    out << "# warning_failed_seeds";
    for (int s : failed) out << ' ' << s;
    out << '\n';
  }
  if (parsed.empty()) {
    out << "# no completed seeds\n";
    return out.str();
  }
  double mean_bc = 0.0;
  for (const auto& p : parsed) mean_bc += p.bc_regret;
  mean_bc /= static_cast<double>(parsed.size());
  out << "# mean_bc_regret " << fmt(mean_bc) << '\n';
  if (!online) {
    out << "seed,bc_regret\n";
    for (size_t i = 0; i < parsed.size(); ++i)
      out << completed[i] << ',' << fmt(parsed[i].bc_regret) << '\n';
    return out.str();
  }
  double mean_final_best = 0.0;
  for (const auto& p : parsed) mean_final_best += p.final_best_regret;
  mean_final_best /= static_cast<double>(parsed.size());
  out << "# mean_final_best_regret " << fmt(mean_final_best) << '\n';
  size_t T = parsed.front().t.size();
  for (const auto& p : parsed)
    if (p.t.size() != T) throw std::runtime_error("aggregate: per-seed record lengths differ");
  if (T > 0) {
    std::vector<double> finals;
    for (const auto& p : parsed) finals.push_back(p.cum.back());
    double m, lo, hi;
    mean_ci(finals, m, lo, hi);
    out << "# mean_final_cum_regret " << fmt(m) << '\n';
  }
  out << "t,mean_cum_regret,ci_lo,ci_hi,mean_pi_size,pi_ci_lo,pi_ci_hi,mean_best_policy_regret\n";
  for (size_t i = 0; i < T; ++i) {
    std::vector<double> cum, pi, best;
    for (const auto& p : parsed) {
      cum.push_back(p.cum[i]);
      pi.push_back(static_cast<double>(p.pi_size[i]));
      best.push_back(p.best[i]);
    }
    double mc, lc, hc, mp, lp, hp, mb, lb, hb;
    mean_ci(cum, mc, lc, hc);
    mean_ci(pi, mp, lp, hp);
    mean_ci(best, mb, lb, hb);
    out << parsed.front().t[i] << ',' << fmt(mc) << ',' << fmt(lc) << ',' << fmt(hc) << ','
        << fmt(mp) << ',' << fmt(lp) << ',' << fmt(hp) << ',' << fmt(mb) << '\n';
  }
  return out.str();
}

AggregateResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  fs::create_directories(config.output_dir);
  TabularMDP env = build_env(config.env, config.p_succ);
  DeterministicPolicy expert = optimal_policy(env);
  double v_star = expected_return(env, expert);

  AggregateResult agg;
  struct SeedOutcome {
    int seed;
    bool ok = false;
    RunResult run;
  };
  // Seeds are independent; run them in a worker pool when cores allow.
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<SeedOutcome> outcomes(config.seeds.size());
  auto work = [&](size_t idx) {
    int seed = config.seeds[idx];
    outcomes[idx].seed = seed;
    try {
      OfflineDataset dataset = make_dataset(env, expert, config, seed);
      RunResult run;
      if (config.algorithm == "bc_only") {
        DeterministicPolicy bc = bc_fit(dataset, env.n_states, env.n_actions);
        run.bc_policy = bc;
        run.bc_regret = v_star - expected_return(env, bc);
        run.best_policy = bc;
        run.final_best_regret = run.bc_regret;
      } else if (config.algorithm == "pbrl") {
        run = run_baseline_pbrl(env, dataset, config, seed);
      } else {
        run = run_bridge(env, dataset, config, seed);
      }
      write_atomic(seed_csv_path(config.output_dir, seed), seed_csv_text(config, seed, run));
      outcomes[idx].run = std::move(run);
      outcomes[idx].ok = true;
    } catch (const std::exception&) {
      outcomes[idx].ok = false;
      std::error_code ec;
      fs::remove(seed_csv_path(config.output_dir, seed), ec);
    }
  };
  if (workers <= 1 || config.seeds.size() <= 1) {
    for (size_t i = 0; i < config.seeds.size(); ++i) work(i);
  } else {
    std::vector<std::future<void>> futures;
    for (size_t i = 0; i < config.seeds.size(); ++i)
      futures.push_back(std::async(std::launch::async, work, i));
    for (auto& f : futures) f.get();
  }
  for (auto& o : outcomes) {
    if (o.ok) {
      agg.completed_seeds.push_back(o.seed);
      agg.runs.push_back(std::move(o.run));
    } else {
      agg.failed_seeds.push_back(o.seed);
    }
  }
  agg.n_seeds = static_cast<int>(agg.completed_seeds.size());

  std::string aggregate_text = aggregate_from_files(config.output_dir, config);
  write_atomic(config.output_dir + "/aggregate.csv", aggregate_text);

  // Curves from the in-memory runs (same data the files hold).
  if (agg.n_seeds > 0) {
    double bc_sum = 0.0, final_cum = 0.0, final_best = 0.0;
    for (const auto& run : agg.runs) {
      bc_sum += run.bc_regret;
      final_best += run.final_best_regret;
      if (!run.records.empty()) final_cum += run.records.back().cum_regret;
    }
    agg.mean_bc_regret = bc_sum / agg.n_seeds;
    agg.mean_final_best_regret = final_best / agg.n_seeds;
    agg.mean_final_cum_regret = final_cum / agg.n_seeds;
    if (config.algorithm != "bc_only" && !agg.runs.front().records.empty()) {
      size_t T = agg.runs.front().records.size();
      for (size_t i = 0; i < T; ++i) {
        std::vector<double> cum, pi, best;
        for (const auto& run : agg.runs) {
          cum.push_back(run.records[i].cum_regret);
          pi.push_back(static_cast<double>(run.records[i].pi_t_size));
          best.push_back(run.records[i].best_policy_regret);
        }
        double mc, lc, hc, mp, lp, hp, mb, lb, hb;
        mean_ci(cum, mc, lc, hc);
        mean_ci(pi, mp, lp, hp);
        mean_ci(best, mb, lb, hb);
        agg.t.push_back(agg.runs.front().records[i].t);
        agg.mean_cum_regret.push_back(mc);
        agg.cum_ci_lo.push_back(lc);
        agg.cum_ci_hi.push_back(hc);
        agg.mean_pi_size.push_back(mp);
        agg.pi_ci_lo.push_back(lp);
        agg.pi_ci_hi.push_back(hp);
        agg.mean_best_policy_regret.push_back(mb);
      }
    }
  }
  return agg;
}

std::vector<Table1Cell> run_table1_sweep(const ExperimentConfig& base, int runs_per_cell) {
  if (base.env != "gridworld")
    throw std::invalid_argument("run_table1_sweep: env must be gridworld");
  if (runs_per_cell < 2) throw std::invalid_argument("run_table1_sweep: need >= 2 runs per cell");
  TabularMDP env = build_env(base.env, base.p_succ);
  DeterministicPolicy expert = optimal_policy(env);
  double gamma_min = base.gamma_min > 0.0 ? base.gamma_min : min_visitation(env, expert);

  const int n_values[] = {10, 20, 40, 80, 1000};
  const double noise_values[] = {0.0, 0.1, 0.2};
  std::vector<Table1Cell> cells;
  for (int n : n_values) {
    for (double noise : noise_values) {
      std::string cell_tag = "table1_n" + std::to_string(n) + "_p" + fmt(noise);
      std::vector<double> fractions;
      for (int run = 0; run < runs_per_cell; ++run) {
        ExperimentConfig cfg = base;
        cfg.n_offline = n;
        cfg.noise_p = noise;
        OfflineDataset dataset;
        dataset.horizon = env.horizon;
        Rng ds_rng = seed_stream(base.master_seed, static_cast<std::uint64_t>(run),
                                 cell_tag + "_dataset");
        for (int i = 0; i < n; ++i)
          dataset.trajectories.push_back(sample_trajectory(env, expert, ds_rng));
        if (noise > 0.0) {
          Rng noise_rng = seed_stream(base.master_seed, static_cast<std::uint64_t>(run),
                                      cell_tag + "_noise");
          dataset = corrupt_dataset(dataset, noise, env.n_actions, noise_rng);
        }
        DeterministicPolicy bc = bc_fit(dataset, env.n_states, env.n_actions);
        Kernel p_hat = transition_mle(dataset, env.n_states, env.n_actions);
        double radius = base.radius_mode == "theoretical"
                            ? theoretical_radius(n, env.n_states, env.n_actions, env.horizon,
                                                 base.delta, gamma_min)
                            : base.radius_value;
        Rng pool_rng = seed_stream(base.master_seed, static_cast<std::uint64_t>(run),
                                   cell_tag + "_pool");
        std::vector<DeterministicPolicy> pool = build_candidate_pool(
            env.n_states, env.n_actions, PoolMode::kSample, base.pool_size, pool_rng);
        OfflineConfidenceSet cs =
            build_confidence_set(pool, bc, p_hat, radius, env.initial_dist, env.horizon);
        fractions.push_back(cs.candidate_fraction);
      }
      Table1Cell cell;
      cell.n = n;
      cell.noise = noise;
      cell.runs = runs_per_cell;
      double mean = 0.0;
      for (double f : fractions) mean += f;
      mean /= fractions.size();
      double var = 0.0;
      for (double f : fractions) var += (f - mean) * (f - mean);
      cell.mean_fraction = mean;
      cell.std_fraction = std::sqrt(var / (fractions.size() - 1));
      cells.push_back(cell);
    }
  }
  fs::create_directories(base.output_dir);
  std::ostringstream out;
  out << "# config " << config_to_json(base) << '\n';
  out << "# runs_per_cell " << runs_per_cell << '\n';
  out << "n,noise,mean_fraction,std_fraction,runs\n";
  for (const auto& c : cells)
    out << c.n << ',' << fmt(c.noise) << ',' << fmt(c.mean_fraction) << ','
        << fmt(c.std_fraction) << ',' << c.runs << '\n';
  write_atomic(base.output_dir + "/table1.csv", out.str());
  return cells;
}

std::vector<RadiusAblationEntry> run_radius_ablation(const ExperimentConfig& base,
                                                     const std::vector<double>& radius_values) {
  if (radius_values.size() < 2)
    throw std::invalid_argument("run_radius_ablation: need >= 2 radius values");
  TabularMDP env = build_env(base.env, base.p_succ);
  DeterministicPolicy expert = optimal_policy(env);
  std::vector<RadiusAblationEntry> entries;
  for (size_t i = 0; i < radius_values.size(); ++i) {
    ExperimentConfig cfg = base;
    cfg.radius_mode = "fixed";
    cfg.radius_value = radius_values[i];
    cfg.output_dir = base.output_dir + "/radius_" + std::to_string(i);
    RadiusAblationEntry entry;
    entry.radius = radius_values[i];
    entry.aggregate = run_experiment(cfg);
    for (int seed : entry.aggregate.completed_seeds) {
      OfflineDataset dataset = make_dataset(env, expert, cfg, seed);
      DeterministicPolicy bc = bc_fit(dataset, env.n_states, env.n_actions);
      Kernel p_hat = transition_mle(dataset, env.n_states, env.n_actions);
      double dist = std::sqrt(
          squared_hellinger(p_hat, expert, p_hat, bc, env.initial_dist, env.horizon));
      entry.expert_survived.push_back(dist <= radius_values[i] + 1e-12 ? 1 : 0);
    }
    double rate = 0.0;
    for (int v : entry.expert_survived) rate += v;
    entry.survival_rate =
        entry.expert_survived.empty() ? 0.0 : rate / entry.expert_survived.size();
    entries.push_back(std::move(entry));
  }
  fs::create_directories(base.output_dir);
  std::ostringstream out;
  out << "# config " << config_to_json(base) << '\n';
  out << "radius,survival_rate,mean_final_cum_regret,mean_final_best_regret\n";
  for (const auto& e : entries)
    out << fmt(e.radius) << ',' << fmt(e.survival_rate) << ','
        << fmt(e.aggregate.mean_final_cum_regret) << ',' << fmt(e.aggregate.mean_final_best_regret)
        << '\n';
  write_atomic(base.output_dir + "/radius_ablation.csv", out.str());
  return entries;
}

}  // namespace bridge
