#pragma once

#include <string>
#include <vector>

#include "bridge/mdp.hpp"

namespace bridge {

struct OfflineDataset {
  std::vector<Trajectory> trajectories;
  int horizon = 0;  // shared horizon H

  int n() const { return static_cast<int>(trajectories.size()); }
  void validate() const;  // all trajectories share the horizon
};

struct OfflineConfidenceSet {
  DeterministicPolicy bc_policy;
  Kernel p_hat;
  double radius = 0.0;
  std::vector<DeterministicPolicy> candidates;  // deduplicated, bc included
  double candidate_fraction = 0.0;              // passing / pool (duplicates counted)
};

// Log-loss behavioral cloning over deterministic tabular policies: the
// maximizer is the per-state majority action.  Unvisited states default to
// action 0; ties resolve to the lowest tied action index.
DeterministicPolicy bc_fit(const OfflineDataset& dataset, int n_states, int n_actions);

// Normalized next-state counts; unvisited (s,a) rows default to uniform.
Kernel transition_mle(const OfflineDataset& dataset, int n_states, int n_actions);

// Confidence-set radius:
//   alpha = sqrt(4 |S| log(|A| * 2/delta))
//   beta  = sqrt(4 |S|^2 |A| log(n H * 2/delta))
//   radius = alpha/sqrt(n) + beta/sqrt(n) * (1 + sqrt(H (1 + 2 alpha/(gamma_min sqrt(n)))))
double theoretical_radius(long long n, int n_states, int n_actions, int H, double delta,
                          double gamma_min);

// Pieces of the radius, exposed for scaling tests.
double radius_alpha(int n_states, int n_actions, double delta);
double radius_beta(long long n, int n_states, int n_actions, int H, double delta);

enum class PoolMode { kEnumerate, kSample };

// enumerate -> all |A|^|S| distinct policies (guarded by cap);
// sample -> pool_size uniform draws, duplicates allowed.
std::vector<DeterministicPolicy> build_candidate_pool(int n_states, int n_actions, PoolMode mode,
                                                      long long pool_size, Rng& rng,
                                                      long long enumerate_cap = 1000000);

// Keep pool members with sqrt(H2(p_hat^pi, p_hat^bc)) <= radius; dedupe,
// append bc if absent; fraction counts duplicates.
OfflineConfidenceSet build_confidence_set(const std::vector<DeterministicPolicy>& pool,
                                          const DeterministicPolicy& bc_policy,
                                          const Kernel& p_hat, double radius,
                                          const std::vector<double>& d0, int H);

// Each action independently replaced by a uniformly random action with
// probability noise_p; states untouched.
OfflineDataset corrupt_dataset(const OfflineDataset& dataset, double noise_p, int n_actions,
                               Rng& rng);

// Minimum nonzero entry of the expert occupancy (per-step state-action),
// used as gamma_min in experiment mode.
double min_visitation(const TabularMDP& mdp, const DeterministicPolicy& expert);

// Dataset CSV io: columns traj_id, step, state, action, next_state.
void save_dataset_csv(const OfflineDataset& dataset, const std::string& path);
OfflineDataset load_dataset_csv(const std::string& path);

// Confidence-set dump: JSON header line (radius, fraction, n) then one
// candidate per line as |S| space-separated action indices.
void save_confidence_set(const OfflineConfidenceSet& set, int n_offline, const std::string& path);

// Policy file: one action index per line.
DeterministicPolicy load_policy(const std::string& path);
void save_policy(const DeterministicPolicy& policy, const std::string& path);

}  // namespace bridge
