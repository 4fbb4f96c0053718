#include "bridge/offline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "bridge/hellinger.hpp"

namespace bridge {

void OfflineDataset::validate() const {
  for (const auto& traj : trajectories) {
    if (static_cast<int>(traj.actions.size()) != horizon ||
        static_cast<int>(traj.states.size()) != horizon + 1)
      throw std::invalid_argument("OfflineDataset: trajectory length mismatch");
  }
}

DeterministicPolicy bc_fit(const OfflineDataset& dataset, int n_states, int n_actions) {
  if (dataset.trajectories.empty()) throw std::invalid_argument("bc_fit: empty dataset");
  std::vector<long long> counts(static_cast<size_t>(n_states) * n_actions, 0);
  for (const auto& traj : dataset.trajectories)
    for (size_t h = 0; h < traj.actions.size(); ++h)
      ++counts[static_cast<size_t>(traj.states[h]) * n_actions + traj.actions[h]];
  DeterministicPolicy policy(n_states, 0);
  for (int s = 0; s < n_states; ++s) {
    long long best = 0;
    int best_a = 0;  // unvisited state -> action 0
    for (int a = 0; a < n_actions; ++a) {
      long long c = counts[static_cast<size_t>(s) * n_actions + a];
      if (c > best) {  // strict: ties keep the lowest index
        best = c;
        best_a = a;
      }
    }
    policy[s] = best_a;
  }
  return policy;
}

Kernel transition_mle(const OfflineDataset& dataset, int n_states, int n_actions) {
  if (dataset.trajectories.empty()) throw std::invalid_argument("transition_mle: empty dataset");
  Kernel k(n_states, n_actions);
  std::vector<long long> totals(static_cast<size_t>(n_states) * n_actions, 0);
  for (const auto& traj : dataset.trajectories) {
    for (size_t h = 0; h < traj.actions.size(); ++h) {
      int s = traj.states[h], a = traj.actions[h], s2 = traj.states[h + 1];
      k.at(s, a, s2) += 1.0;
      ++totals[static_cast<size_t>(s) * n_actions + a];
    }
  }
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      long long total = totals[static_cast<size_t>(s) * n_actions + a];
      double* row = k.row(s, a);
      if (total == 0) {
        for (int s2 = 0; s2 < n_states; ++s2) row[s2] = 1.0 / n_states;
      } else {
        for (int s2 = 0; s2 < n_states; ++s2) row[s2] /= static_cast<double>(total);
      }
    }
  }
  return k;
}

double radius_alpha(int n_states, int n_actions, double delta) {
  return std::sqrt(4.0 * n_states * std::log(n_actions * 2.0 / delta));
}

double radius_beta(long long n, int n_states, int n_actions, int H, double delta) {
  return std::sqrt(4.0 * n_states * n_states * n_actions *
                   std::log(static_cast<double>(n) * H * 2.0 / delta));
}

double theoretical_radius(long long n, int n_states, int n_actions, int H, double delta,
                          double gamma_min) {
  if (n < 1 || n_states < 1 || n_actions < 1 || H < 1)
    throw std::invalid_argument("theoretical_radius: nonpositive size argument");
  if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("theoretical_radius: delta out of (0,1)");
  if (gamma_min <= 0.0) throw std::invalid_argument("theoretical_radius: gamma_min must be > 0");
  double sqrt_n = std::sqrt(static_cast<double>(n));
  double alpha = radius_alpha(n_states, n_actions, delta);
  double beta = radius_beta(n, n_states, n_actions, H, delta);
  return alpha / sqrt_n +
         beta / sqrt_n * (1.0 + std::sqrt(H * (1.0 + 2.0 * alpha / (gamma_min * sqrt_n))));
}

std::vector<DeterministicPolicy> build_candidate_pool(int n_states, int n_actions, PoolMode mode,
                                                      long long pool_size, Rng& rng,
                                                      long long enumerate_cap) {
  std::vector<DeterministicPolicy> pool;
  if (mode == PoolMode::kEnumerate) {
    double count = std::pow(static_cast<double>(n_actions), n_states);
    if (count > static_cast<double>(enumerate_cap))
      throw std::invalid_argument("build_candidate_pool: enumeration too large");
    long long total = static_cast<long long>(std::llround(count));
    pool.reserve(total);
    DeterministicPolicy p(n_states, 0);
    for (long long i = 0; i < total; ++i) {
      pool.push_back(p);
      // mixed-radix increment, state 0 fastest
      for (int s = 0; s < n_states; ++s) {
        if (++p[s] < n_actions) break;
        p[s] = 0;
      }
    }
  } else {
    if (pool_size < 1) throw std::invalid_argument("build_candidate_pool: empty pool requested");
    pool.reserve(pool_size);
    for (long long i = 0; i < pool_size; ++i) {
      DeterministicPolicy p(n_states);
      for (int s = 0; s < n_states; ++s)
        p[s] = static_cast<int>(rng() % static_cast<std::uint64_t>(n_actions));
      pool.push_back(std::move(p));
    }
  }
  return pool;
}

OfflineConfidenceSet build_confidence_set(const std::vector<DeterministicPolicy>& pool,
                                          const DeterministicPolicy& bc_policy,
                                          const Kernel& p_hat, double radius,
                                          const std::vector<double>& d0, int H) {
  if (pool.empty()) throw std::invalid_argument("build_confidence_set: empty pool");
  OfflineConfidenceSet set;
  set.bc_policy = bc_policy;
  set.p_hat = p_hat;
  set.radius = radius;
  long long passing = 0;
  std::map<DeterministicPolicy, bool> seen;
  for (const auto& pi : pool) {
    double h2 = squared_hellinger(p_hat, pi, p_hat, bc_policy, d0, H);
    if (std::sqrt(h2) <= radius + 1e-12) {
      ++passing;
      auto [it, inserted] = seen.emplace(pi, true);
      if (inserted) set.candidates.push_back(pi);
    }
  }
  set.candidate_fraction = static_cast<double>(passing) / static_cast<double>(pool.size());
  if (!seen.count(bc_policy)) set.candidates.push_back(bc_policy);
  return set;
}

OfflineDataset corrupt_dataset(const OfflineDataset& dataset, double noise_p, int n_actions,
                               Rng& rng) {
  if (noise_p < 0.0 || noise_p > 1.0)
    throw std::invalid_argument("corrupt_dataset: noise_p out of [0,1]");
  OfflineDataset out = dataset;
  for (auto& traj : out.trajectories)
    for (auto& a : traj.actions)
      if (uniform01(rng) < noise_p) a = static_cast<int>(rng() % static_cast<std::uint64_t>(n_actions));
  return out;
}

double min_visitation(const TabularMDP& mdp, const DeterministicPolicy& expert) {
  std::vector<double> occ = occupancy(mdp, expert);
  double best = 1.0;
  for (double v : occ)
    if (v > 0.0 && v < best) best = v;
  return best;
}

void save_dataset_csv(const OfflineDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset_csv: cannot open " + path);
  out << "traj_id,step,state,action,next_state\n";
  for (size_t i = 0; i < dataset.trajectories.size(); ++i) {
    const auto& traj = dataset.trajectories[i];
    for (size_t h = 0; h < traj.actions.size(); ++h)
      out << i << ',' << h << ',' << traj.states[h] << ',' << traj.actions[h] << ','
          << traj.states[h + 1] << '\n';
  }
}

OfflineDataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset_csv: cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  std::map<long long, std::vector<std::array<int, 3>>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    long long traj_id, step;
    int state, action, next_state;
    char comma;
    ss >> traj_id >> comma >> step >> comma >> state >> comma >> action >> comma >> next_state;
    auto& v = rows[traj_id];
    if (static_cast<long long>(v.size()) != step)
      throw std::runtime_error("load_dataset_csv: steps out of order");
    v.push_back({state, action, next_state});
  }
  OfflineDataset dataset;
  for (auto& [id, steps] : rows) {
    Trajectory traj;
    for (auto& [s, a, s2] : steps) {
      traj.states.push_back(s);
      traj.actions.push_back(a);
    }
    traj.states.push_back(steps.back()[2]);
    dataset.trajectories.push_back(std::move(traj));
  }
  if (!dataset.trajectories.empty())
    dataset.horizon = static_cast<int>(dataset.trajectories.front().actions.size());
  dataset.validate();
  return dataset;
}

void save_confidence_set(const OfflineConfidenceSet& set, int n_offline, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_confidence_set: cannot open " + path);
  nlohmann::json header = {{"radius", set.radius},
                           {"fraction", set.candidate_fraction},
                           {"n", n_offline}};
  out << header.dump() << '\n';
  for (const auto& pi : set.candidates) {
    for (size_t s = 0; s < pi.size(); ++s) out << (s ? " " : "") << pi[s];
    out << '\n';
  }
}

DeterministicPolicy load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_policy: cannot open " + path);
  DeterministicPolicy policy;
  int a;
  while (in >> a) policy.push_back(a);
  if (policy.empty()) throw std::runtime_error("load_policy: empty policy file " + path);
  return policy;
}

void save_policy(const DeterministicPolicy& policy, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_policy: cannot open " + path);
  for (int a : policy) out << a << '\n';
}

}  // namespace bridge
