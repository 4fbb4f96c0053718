#pragma once

#include <string>
#include <vector>

#include "bridge/rng.hpp"

namespace bridge {

// Row-stochastic transition kernel P[s][a][s'] stored flat.
struct Kernel {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> p;  // size n_states * n_actions * n_states

  Kernel() = default;
  Kernel(int S, int A) : n_states(S), n_actions(A), p(static_cast<size_t>(S) * A * S, 0.0) {}

  double& at(int s, int a, int s2) {
    return p[(static_cast<size_t>(s) * n_actions + a) * n_states + s2];
  }
  double at(int s, int a, int s2) const {
    return p[(static_cast<size_t>(s) * n_actions + a) * n_states + s2];
  }
  const double* row(int s, int a) const {
    return p.data() + (static_cast<size_t>(s) * n_actions + a) * n_states;
  }
  double* row(int s, int a) {
    return p.data() + (static_cast<size_t>(s) * n_actions + a) * n_states;
  }
  void validate(double tol = 1e-12) const;  // throws std::invalid_argument
};

// Finite-horizon tabular MDP.  Rewards are per-state and used for evaluation
// only (the learner itself is reward-free).
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  int horizon = 0;
  Kernel transitions;
  std::vector<double> initial_dist;  // d0 over states
  std::vector<double> rewards;       // r[s]

  void validate(double tol = 1e-12) const;
};

struct Trajectory {
  std::vector<int> states;   // length H+1
  std::vector<int> actions;  // length H
};

// One action index per state; stationary deterministic policy.
using DeterministicPolicy = std::vector<int>;

Trajectory sample_trajectory(const TabularMDP& mdp, const DeterministicPolicy& policy, Rng& rng);

// Sum of r(s_h) over h = 0..H (reward accrued at every visited state,
// including the initial one).
double trajectory_return(const TabularMDP& mdp, const Trajectory& traj);

// Exact E[sum_h r(s_h)] by forward propagation of the state distribution.
double expected_return(const TabularMDP& mdp, const DeterministicPolicy& policy);

double monte_carlo_return(const TabularMDP& mdp, const DeterministicPolicy& policy,
                          long long n_rollouts, Rng& rng);

// Per-step state-action occupancy d^{pi,t}(s,a), shape (H, S, A) flat;
// slice t sums to 1.  Overload taking an arbitrary kernel so estimated
// dynamics can be plugged in.
std::vector<double> occupancy(const Kernel& P, const std::vector<double>& d0,
                              const DeterministicPolicy& policy, int H);
std::vector<double> occupancy(const TabularMDP& mdp, const DeterministicPolicy& policy);

// State distribution at step t (t = 0..H) under the policy.
std::vector<double> state_distribution(const Kernel& P, const std::vector<double>& d0,
                                       const DeterministicPolicy& policy, int t);

// Best deterministic stationary policy: backward-induction greedy candidates
// (one per stage) refined by deterministic coordinate ascent on the exact
// return; ties broken by lowest action index.
DeterministicPolicy optimal_policy(const TabularMDP& mdp);

// The two built-in environments.
TabularMDP build_star_mdp();
TabularMDP build_gridworld(double p_succ = 0.8);

// Registry used by config/CLI: "star" or "gridworld".
TabularMDP build_env(const std::string& name, double p_succ = 0.8);

}  // namespace bridge
