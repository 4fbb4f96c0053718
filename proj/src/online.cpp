#include "bridge/online.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "bridge/hellinger.hpp"

namespace bridge {

VisitCounts::VisitCounts(int n_states, int n_actions)
    : S(n_states),
      A(n_actions),
      n2_offline(static_cast<size_t>(n_states) * n_actions, 0),
      n2_online(static_cast<size_t>(n_states) * n_actions, 0),
      n3_offline(static_cast<size_t>(n_states) * n_actions * n_states, 0),
      n3_online(static_cast<size_t>(n_states) * n_actions * n_states, 0) {}

namespace {
void add_traj(const Trajectory& traj, int A, int S, std::vector<long long>& n2,
              std::vector<long long>& n3) {
  for (size_t h = 0; h < traj.actions.size(); ++h) {
    int s = traj.states[h], a = traj.actions[h], s2 = traj.states[h + 1];
    ++n2[static_cast<size_t>(s) * A + a];
    ++n3[(static_cast<size_t>(s) * A + a) * S + s2];
  }
}
}  // namespace

void VisitCounts::add_offline(const Trajectory& traj) { add_traj(traj, A, S, n2_offline, n3_offline); }
void VisitCounts::add_online(const Trajectory& traj) { add_traj(traj, A, S, n2_online, n3_online); }
void VisitCounts::add_offline(const OfflineDataset& dataset) {
  for (const auto& traj : dataset.trajectories) add_offline(traj);
}
long long VisitCounts::total_online() const {
  long long total = 0;
  for (long long v : n2_online) total += v;
  return total;
}

Kernel combined_transition_estimate(const VisitCounts& counts) {
  Kernel k(counts.S, counts.A);
  for (int s = 0; s < counts.S; ++s) {
    for (int a = 0; a < counts.A; ++a) {
      long long total = counts.combined(s, a);
      double* row = k.row(s, a);
      if (total == 0) {
        for (int s2 = 0; s2 < counts.S; ++s2) row[s2] = 1.0 / counts.S;
        continue;
      }
      size_t base = (static_cast<size_t>(s) * counts.A + a) * counts.S;
      for (int s2 = 0; s2 < counts.S; ++s2)
        row[s2] = static_cast<double>(counts.n3_offline[base + s2] + counts.n3_online[base + s2]) /
                  static_cast<double>(total);
    }
  }
  return k;
}

double xi_term(double eta, double log_inv_delta, long long N, int H, int S, int A) {
  if (N <= 0) return 2.0 * eta;
  double n_for_log = static_cast<double>(std::max<long long>(N, 2));
  double U = H * std::log(static_cast<double>(S) * A) + std::log(6.0 * std::log(n_for_log)) +
             log_inv_delta;
  double v = 4.0 * eta * std::sqrt(U / static_cast<double>(N));
  return std::min(2.0 * eta, v);
}

double bonus(const DeterministicPolicy& policy, double eta, double log_inv_delta,
             const VisitCounts& counts, const Kernel& p_hat, const std::vector<double>& d0,
             int H, long long n_rollouts, Rng& rng) {
  if (eta <= 0.0) throw std::invalid_argument("bonus: eta must be > 0");
  if (n_rollouts < 1) throw std::invalid_argument("bonus: n_rollouts must be >= 1");
  int S = counts.S;
  double total = 0.0;
  for (long long i = 0; i < n_rollouts; ++i) {
    int s = sample_index(d0, rng);
    for (int h = 0; h < H; ++h) {
      int a = policy[s];
      total += xi_term(eta, log_inv_delta, counts.combined(s, a), H, S, counts.A);
      s = sample_index(p_hat.row(s, a), S, rng);
    }
  }
  return total / static_cast<double>(n_rollouts);
}

double bonus_exact(const DeterministicPolicy& policy, double eta, double log_inv_delta,
                   const VisitCounts& counts, const Kernel& p_hat,
                   const std::vector<double>& d0, int H) {
  int S = counts.S, A = counts.A;
  std::vector<double> occ = occupancy(p_hat, d0, policy, H);
  double total = 0.0;
  for (int t = 0; t < H; ++t) {
    const double* slice = occ.data() + static_cast<size_t>(t) * S * A;
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        double mass = slice[s * A + a];
        if (mass > 0.0) total += mass * xi_term(eta, log_inv_delta, counts.combined(s, a), H, S, A);
      }
  }
  return total;
}

namespace {

// Pairwise squared Mahalanobis distances D2_ij = (phi_i - phi_j)^T V^-1 (phi_i - phi_j).
Eigen::MatrixXd pair_distances_sq(const Eigen::MatrixXd& embeddings, const DataMatrix& v_bar) {
  Eigen::MatrixXd z = embeddings * v_bar.inverse();
  Eigen::MatrixXd g = z * embeddings.transpose();
  Eigen::VectorXd diag = g.diagonal();
  Eigen::MatrixXd d2 = diag.replicate(1, g.cols()) + diag.transpose().replicate(g.rows(), 1) -
                       2.0 * g;
  return d2.cwiseMax(0.0);
}

}  // namespace

std::vector<int> online_filter(const Eigen::MatrixXd& embeddings, const Eigen::VectorXd& w,
                               const DataMatrix& v_bar, double gamma,
                               const std::vector<double>& bonuses) {
  int k = static_cast<int>(embeddings.rows());
  if (k == 0) throw std::invalid_argument("online_filter: empty candidate list");
  Eigen::VectorXd scores = embeddings * w;
  Eigen::MatrixXd d2 = pair_distances_sq(embeddings, v_bar);
  std::vector<int> kept;
  for (int i = 0; i < k; ++i) {
    bool ok = true;
    for (int j = 0; j < k && ok; ++j) {
      double lhs = scores[i] - scores[j] + gamma * std::sqrt(d2(i, j)) + bonuses[i] + bonuses[j];
      if (lhs < -1e-12) ok = false;
    }
    if (ok) kept.push_back(i);
  }
  return kept;
}

SelectionMode selection_mode_from_name(const std::string& name) {
  if (name == "alg1") return SelectionMode::kAlg1;
  if (name == "best_vs_random") return SelectionMode::kBestVsRandom;
  if (name == "ucb") return SelectionMode::kUcb;
  if (name == "pure_uncertainty") return SelectionMode::kPureUncertainty;
  throw std::invalid_argument("unknown selection mode '" + name + "'");
}

std::pair<int, int> select_pair(const std::vector<int>& pi_t, const Eigen::MatrixXd& embeddings,
                                const Eigen::VectorXd& w, const DataMatrix& v_bar, double gamma,
                                const std::vector<double>& bonuses, SelectionMode mode, Rng& rng) {
  if (pi_t.empty()) throw std::invalid_argument("select_pair: empty candidate set");
  int k = static_cast<int>(pi_t.size());
  if (k == 1) return {pi_t[0], pi_t[0]};
  Eigen::MatrixXd sub(k, embeddings.cols());
  for (int i = 0; i < k; ++i) sub.row(i) = embeddings.row(pi_t[i]);
  Eigen::VectorXd scores = sub * w;
  Eigen::MatrixXd d2 = pair_distances_sq(sub, v_bar);

  auto argmax_score = [&]() {
    int best = 0;
    for (int i = 1; i < k; ++i)
      if (scores[i] > scores[best] + 1e-15) best = i;
    return best;
  };

  switch (mode) {
    case SelectionMode::kAlg1: {
      int bi = 0, bj = 0;
      double best = -1e300;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          double v = gamma * std::sqrt(d2(i, j)) + bonuses[pi_t[i]] + bonuses[pi_t[j]];
          if (v > best + 1e-15) {
            best = v;
            bi = i;
            bj = j;
          }
        }
      return {pi_t[bi], pi_t[bj]};
    }
    case SelectionMode::kBestVsRandom: {
      int i = argmax_score();
      int j = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
      return {pi_t[i], pi_t[j]};
    }
    case SelectionMode::kUcb: {
      int i = argmax_score();
      int bj = 0;
      double best = -1e300;
      for (int j = 0; j < k; ++j) {
        double v = scores[j] + gamma * std::sqrt(d2(i, j));
        if (v > best + 1e-15) {
          best = v;
          bj = j;
        }
      }
      return {pi_t[i], pi_t[bj]};
    }
    case SelectionMode::kPureUncertainty: {
      int bi = 0, bj = 0;
      double best = -1e300;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          if (d2(i, j) > best + 1e-15) {
            best = d2(i, j);
            bi = i;
            bj = j;
          }
      return {pi_t[bi], pi_t[bj]};
    }
  }
  throw std::invalid_argument("select_pair: unknown mode");
}

double evaluate_regret(const TabularMDP& env, const DeterministicPolicy& policy,
                       const DeterministicPolicy& reference) {
  return expected_return(env, reference) - expected_return(env, policy);
}

double pseudo_regret(const TabularMDP& env, const Embedding& emb, const Eigen::VectorXd& w_star,
                     const DeterministicPolicy& reference, const DeterministicPolicy& pi1,
                     const DeterministicPolicy& pi2) {
  auto score = [&](const DeterministicPolicy& pi) {
    return policy_embedding(emb, pi, env.transitions, env.initial_dist).dot(w_star);
  };
  return (2.0 * score(reference) - score(pi1) - score(pi2)) / 2.0;
}

Eigen::VectorXd fit_w_star(const TabularMDP& env, const Embedding& emb, long long n_rollouts,
                           Rng& rng) {
  Eigen::MatrixXd xtx = 1e-8 * Eigen::MatrixXd::Identity(emb.d, emb.d);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(emb.d);
  for (long long i = 0; i < n_rollouts; ++i) {
    DeterministicPolicy pi(env.n_states);
    for (int s = 0; s < env.n_states; ++s)
      pi[s] = static_cast<int>(rng() % static_cast<std::uint64_t>(env.n_actions));
    Trajectory traj = sample_trajectory(env, pi, rng);
    Eigen::VectorXd x = embed(emb, traj);
    xtx.noalias() += x * x.transpose();
    xty.noalias() += trajectory_return(env, traj) * x;
  }
  return xtx.ldlt().solve(xty);
}

namespace {

RunResult run_online(const TabularMDP& env, const OfflineDataset& dataset,
                     const ExperimentConfig& config, int seed, bool baseline_pbrl) {
  auto t_start = std::chrono::steady_clock::now();
  config.validate();
  env.validate();
  dataset.validate();
  const int S = env.n_states, A = env.n_actions, H = env.horizon;

  DeterministicPolicy expert = optimal_policy(env);
  double v_star = expected_return(env, expert);
  DeterministicPolicy bc = bc_fit(dataset, S, A);
  Kernel p_hat_off = transition_mle(dataset, S, A);

  RunResult result;
  result.bc_policy = bc;
  result.bc_regret = v_star - expected_return(env, bc);

  double radius;
  if (config.radius_mode == "theoretical") {
    double gamma_min = config.gamma_min > 0.0 ? config.gamma_min : min_visitation(env, expert);
    radius = theoretical_radius(config.n_offline, S, A, H, config.delta, gamma_min);
  } else {
    radius = config.radius_value;
  }
  result.radius = radius;

  Rng pool_rng = seed_stream(config.master_seed, static_cast<std::uint64_t>(seed), "pool");
  PoolMode pool_mode =
      config.pool_mode == "enumerate" ? PoolMode::kEnumerate : PoolMode::kSample;
  std::vector<DeterministicPolicy> pool =
      build_candidate_pool(S, A, pool_mode, config.pool_size, pool_rng, config.enumerate_cap);
  OfflineConfidenceSet cs =
      build_confidence_set(pool, bc, p_hat_off, radius, env.initial_dist, H);
  result.candidate_fraction = cs.candidate_fraction;

  std::vector<DeterministicPolicy> candidates;
  if (!baseline_pbrl) {
    candidates = cs.candidates;
  } else if (pool_mode == PoolMode::kEnumerate) {
    candidates = pool;  // e.g. all 1024 StarMDP policies
  } else {
    // Pi_offline plus random policies up to pool_size slots.
    candidates = cs.candidates;
    Rng fill_rng = seed_stream(config.master_seed, static_cast<std::uint64_t>(seed), "pool_fill");
    while (static_cast<long long>(candidates.size()) < config.pool_size) {
      DeterministicPolicy pi(S);
      for (int s = 0; s < S; ++s) pi[s] = static_cast<int>(fill_rng() % static_cast<std::uint64_t>(A));
      candidates.push_back(std::move(pi));
    }
  }
  const int k = static_cast<int>(candidates.size());
  result.n_candidates = k;

  const bool known = config.dynamics == "known";
  Embedding emb = make_embedding(embedding_kind_from_name(config.embedding), S, A, H);
  const double kap = kappa(emb.B, config.W);
  const double reg = kap * config.lambda;
  const double eta = 2.0 * config.W * emb.B;
  // delta' = delta / (2 |A|^{|S|}) union bound, in log space
  const double log_inv_delta =
      std::log(2.0) + S * std::log(static_cast<double>(A)) + std::log(1.0 / config.delta);

  VisitCounts counts(S, A);
  if (!baseline_pbrl) counts.add_offline(dataset);
  Kernel p_hat = known ? env.transitions : combined_transition_estimate(counts);

  DataMatrix v_bar(emb.d, reg);
  DataMatrix v_emp(emb.d, reg);
  std::vector<PreferenceRecord> records;
  std::vector<double> bonus_history;
  SelectionMode sel_mode = selection_mode_from_name(config.selection);

  std::vector<double> rets(k);
  for (int i = 0; i < k; ++i) rets[i] = expected_return(env, candidates[i]);

  Eigen::VectorXd w_star;
  const bool need_w_star = config.oracle_mode == "bt" || config.regret_mode == "pseudo";
  if (need_w_star) {
    Rng ws_rng = seed_stream(config.master_seed, 0, "wstar_" + config.env + "_" + config.embedding);
    w_star = fit_w_star(env, emb, 5000, ws_rng);
  }

  Rng traj_rng = seed_stream(config.master_seed, static_cast<std::uint64_t>(seed), "traj");
  Rng oracle_rng = seed_stream(config.master_seed, static_cast<std::uint64_t>(seed), "oracle");
  Rng bonus_rng = seed_stream(config.master_seed, static_cast<std::uint64_t>(seed), "bonus");
  Rng select_rng = seed_stream(config.master_seed, static_cast<std::uint64_t>(seed), "select");

  double cum_regret = 0.0;
  Eigen::MatrixXd phi(k, emb.d);
  Eigen::VectorXd w_proj = Eigen::VectorXd::Zero(emb.d);
  for (int t = 1; t <= config.T; ++t) {
    WeightEstimate mle = mle_weights(records, emb.d, config.lambda);
    WeightEstimate proj = project_weights(mle.w, records, config.lambda, reg, config.W);
    w_proj = proj.w;

    for (int i = 0; i < k; ++i)
      phi.row(i) = policy_embedding(emb, candidates[i], p_hat, env.initial_dist);

    std::vector<double> bonuses(k, 0.0);
    if (!known)
      for (int i = 0; i < k; ++i)
        bonuses[i] = bonus(candidates[i], eta, log_inv_delta, counts, p_hat, env.initial_dist, H,
                           config.bonus_rollouts, bonus_rng);

    double gamma = config.gamma_mode == "fixed"
                       ? config.gamma_value
                       : gamma_theoretical(t, config.T, emb.d, emb.B, config.W, config.lambda,
                                           config.delta, kap, bonus_history);

    std::vector<int> pi_t = online_filter(phi, w_proj, v_bar, gamma, bonuses);
    auto [ci, cj] = select_pair(pi_t, phi, w_proj, v_bar, gamma, bonuses, sel_mode, select_rng);

    int outcome = 0;
    for (int r = 0; r < config.n_rollouts_per_pair; ++r) {
      Trajectory tau1 = sample_trajectory(env, candidates[ci], traj_rng);
      Trajectory tau2 = sample_trajectory(env, candidates[cj], traj_rng);
      Eigen::VectorXd dphi = embed(emb, tau1) - embed(emb, tau2);
      if (config.oracle_mode == "deterministic") {
        outcome = oracle_deterministic(trajectory_return(env, tau1), trajectory_return(env, tau2));
      } else {
        outcome = oracle_bt(dphi, w_star, oracle_rng);
      }
      records.push_back({dphi, outcome});
      v_emp.rank_one_update(dphi);
      counts.add_online(tau1);
      counts.add_online(tau2);
    }
    v_bar.rank_one_update(phi.row(ci).transpose() - phi.row(cj).transpose());
    bonus_history.push_back(bonuses[ci]);
    bonus_history.push_back(bonuses[cj]);
    if (!known) p_hat = combined_transition_estimate(counts);

    double inst;
    if (config.regret_mode == "pseudo") {
      inst = pseudo_regret(env, emb, w_star, expert, candidates[ci], candidates[cj]);
    } else {
      inst = (2.0 * v_star - rets[ci] - rets[cj]) / 2.0;
    }
    cum_regret += inst;

    Eigen::VectorXd scores = phi * w_proj;
    int best_idx = 0;
    for (int i = 1; i < k; ++i)
      if (scores[i] > scores[best_idx] + 1e-15) best_idx = i;

    StepRecord rec;
    rec.seed = seed;
    rec.t = t;
    rec.pi_t_size = static_cast<int>(pi_t.size());
    rec.pair_i = ci;
    rec.pair_j = cj;
    rec.outcome = outcome;
    rec.inst_regret = inst;
    rec.cum_regret = cum_regret;
    rec.best_policy_regret = v_star - rets[best_idx];
    rec.bonus_1 = bonuses[ci];
    rec.bonus_2 = bonuses[cj];
    rec.gamma = gamma;
    result.records.push_back(rec);
  }

  if (config.T == 0) {
    result.best_policy = bc;
  } else {
    WeightEstimate mle = mle_weights(records, emb.d, config.lambda);
    WeightEstimate proj = project_weights(mle.w, records, config.lambda, reg, config.W);
    for (int i = 0; i < k; ++i)
      phi.row(i) = policy_embedding(emb, candidates[i], p_hat, env.initial_dist);
    Eigen::VectorXd scores = phi * proj.w;
    int best_idx = 0;
    for (int i = 1; i < k; ++i)
      if (scores[i] > scores[best_idx] + 1e-15) best_idx = i;
    result.best_policy = candidates[best_idx];
  }
  result.final_best_regret = v_star - expected_return(env, result.best_policy);
  result.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace

RunResult run_bridge(const TabularMDP& env, const OfflineDataset& dataset,
                     const ExperimentConfig& config, int seed) {
  return run_online(env, dataset, config, seed, false);
}

RunResult run_baseline_pbrl(const TabularMDP& env, const OfflineDataset& dataset,
                            const ExperimentConfig& config, int seed) {
  return run_online(env, dataset, config, seed, true);
}

}  // namespace bridge
