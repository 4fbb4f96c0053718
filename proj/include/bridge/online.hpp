#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bridge/config.hpp"
#include "bridge/mdp.hpp"
#include "bridge/offline.hpp"
#include "bridge/preference.hpp"

namespace bridge {

// Offline + online (s,a) and (s,a,s') visit counts.
struct VisitCounts {
  int S = 0, A = 0;
  std::vector<long long> n2_offline, n2_online;  // S*A
  std::vector<long long> n3_offline, n3_online;  // S*A*S

  VisitCounts() = default;
  VisitCounts(int n_states, int n_actions);

  long long combined(int s, int a) const {
    return n2_offline[static_cast<size_t>(s) * A + a] + n2_online[static_cast<size_t>(s) * A + a];
  }
  void add_offline(const Trajectory& traj);
  void add_online(const Trajectory& traj);
  void add_offline(const OfflineDataset& dataset);
  long long total_online() const;
};

// P_hat(s'|s,a) = combined counts normalized; zero rows -> uniform.
Kernel combined_transition_estimate(const VisitCounts& counts);

// Per-visit uncertainty term
//   xi = min(2 eta, 4 eta sqrt(U / N)),
//   U = H log(|S||A|) + log(6 log(max(N,2))) + log(1/delta'),
// with xi = 2 eta when the combined count N is 0.  log(1/delta') is passed
// directly so the per-policy union bound over |A|^|S| candidates can be
// applied without underflow.
double xi_term(double eta, double log_inv_delta, long long N, int H, int S, int A);

// Monte Carlo estimate of E_{tau ~ P_hat^pi}[ sum_h xi(s_h, a_h) ].
double bonus(const DeterministicPolicy& policy, double eta, double log_inv_delta,
             const VisitCounts& counts, const Kernel& p_hat, const std::vector<double>& d0,
             int H, long long n_rollouts, Rng& rng);

// Exact occupancy-weighted version; used as a test oracle.
double bonus_exact(const DeterministicPolicy& policy, double eta, double log_inv_delta,
                   const VisitCounts& counts, const Kernel& p_hat,
                   const std::vector<double>& d0, int H);

// Keep candidate i iff for every j:
//   <phi_i - phi_j, w> + gamma ||phi_i - phi_j||_{V_bar^-1} + b_i + b_j >= 0.
// embeddings: k x d row-major matrix of policy embeddings under P_hat_t.
std::vector<int> online_filter(const Eigen::MatrixXd& embeddings, const Eigen::VectorXd& w,
                               const DataMatrix& v_bar, double gamma,
                               const std::vector<double>& bonuses);

enum class SelectionMode { kAlg1, kBestVsRandom, kUcb, kPureUncertainty };
SelectionMode selection_mode_from_name(const std::string& name);

// Pick the next duel from pi_t (indices into the embedding rows).
std::pair<int, int> select_pair(const std::vector<int>& pi_t, const Eigen::MatrixXd& embeddings,
                                const Eigen::VectorXd& w, const DataMatrix& v_bar, double gamma,
                                const std::vector<double>& bonuses, SelectionMode mode, Rng& rng);

struct StepRecord {
  int seed = 0;
  int t = 0;
  int pi_t_size = 0;
  int pair_i = 0;
  int pair_j = 0;
  int outcome = 0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  double best_policy_regret = 0.0;
  double bonus_1 = 0.0;
  double bonus_2 = 0.0;
  double gamma = 0.0;
};

struct RunResult {
  std::vector<StepRecord> records;
  DeterministicPolicy bc_policy;
  DeterministicPolicy best_policy;
  double bc_regret = 0.0;
  double final_best_regret = 0.0;
  double radius = 0.0;
  double candidate_fraction = 0.0;
  int n_candidates = 0;
  double wall_time_sec = 0.0;
};

// Exact expected-return gap against the reference (reward-mode regret).
double evaluate_regret(const TabularMDP& env, const DeterministicPolicy& policy,
                       const DeterministicPolicy& reference);

// Pseudo-regret of a queried pair: (2 s(pi*) - s(pi1) - s(pi2)) / 2 with
// s(pi) = <phi^{P}(pi), w*> under the true dynamics.
double pseudo_regret(const TabularMDP& env, const Embedding& emb, const Eigen::VectorXd& w_star,
                     const DeterministicPolicy& reference, const DeterministicPolicy& pi1,
                     const DeterministicPolicy& pi2);

// Ground-truth preference weights for the bt oracle / pseudo-regret:
// least-squares fit of per-trajectory returns onto embeddings over a rollout
// corpus of random policies.
Eigen::VectorXd fit_w_star(const TabularMDP& env, const Embedding& emb, long long n_rollouts,
                           Rng& rng);

// Full offline+online runs.  seed selects the per-run random streams.
RunResult run_bridge(const TabularMDP& env, const OfflineDataset& dataset,
                     const ExperimentConfig& config, int seed);
RunResult run_baseline_pbrl(const TabularMDP& env, const OfflineDataset& dataset,
                            const ExperimentConfig& config, int seed);

}  // namespace bridge
