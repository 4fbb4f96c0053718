#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bridge/mdp.hpp"

namespace bridge {

enum class EmbeddingKind { kIdentityLong, kIdentityShort, kStateCounts, kFinalState };

EmbeddingKind embedding_kind_from_name(const std::string& name);
std::string embedding_kind_name(EmbeddingKind kind);

// Trajectory embedding family with its dimension d and norm bound B:
//   identity_long : per-step one-hot blocks, d = H(|S|+|A|), B = sqrt(2H)
//   identity_short: summed one-hots,        d = |S|+|A|,    B = sqrt(2) H
//   state_counts  : summed state one-hots,  d = |S|,        B = H
//   final_state   : one-hot of s_H,         d = |S|,        B = 1
struct Embedding {
  EmbeddingKind kind;
  int n_states;
  int n_actions;
  int H;
  int d;
  double B;
};

Embedding make_embedding(EmbeddingKind kind, int n_states, int n_actions, int H);

Eigen::VectorXd embed(const Embedding& emb, const Trajectory& traj);

enum class EmbeddingMode { kExact, kMonteCarlo };

// phi^P(pi) = E_{tau ~ P^pi}[phi(tau)].  Exact mode uses the occupancy
// measure (all kinds are per-step additive or final-state); mc mode averages
// n_rollouts sampled-trajectory embeddings.
Eigen::VectorXd policy_embedding(const Embedding& emb, const DeterministicPolicy& policy,
                                 const Kernel& P, const std::vector<double>& d0,
                                 EmbeddingMode mode = EmbeddingMode::kExact,
                                 long long n_rollouts = 0, Rng* rng = nullptr);

double sigmoid(double x);

// Preference oracles.  bt: Bernoulli(sigma(<dphi, w*>)); deterministic:
// 1 iff return(tau1) >= return(tau2) (ties -> 1).
int oracle_bt(const Eigen::VectorXd& delta_phi, const Eigen::VectorXd& w_star, Rng& rng);
int oracle_deterministic(double return1, double return2);

// kappa = 1 / sigma'(W * B): worst-case inverse sigmoid slope on the ball.
double kappa(double B, double W);

struct PreferenceRecord {
  Eigen::VectorXd delta_phi;  // phi(tau1) - phi(tau2)
  int outcome;                // o in {0,1}
};

struct WeightEstimate {
  Eigen::VectorXd w;
  bool is_projected = false;
  bool converged = true;
  double grad_norm = 0.0;
};

// Regularized logistic log-likelihood
//   L(w) = sum_l [ o_l z_l - log(1 + exp(z_l)) ] - lambda/2 ||w||^2,
// z_l = <dphi_l, w>.  Strictly concave; solved by damped Newton ascent with
// backtracking, initialized from the normalized all-ones vector.
double log_likelihood(const std::vector<PreferenceRecord>& records, double lambda,
                      const Eigen::VectorXd& w);
Eigen::VectorXd log_likelihood_gradient(const std::vector<PreferenceRecord>& records,
                                        double lambda, const Eigen::VectorXd& w);

WeightEstimate mle_weights(const std::vector<PreferenceRecord>& records, int d, double lambda,
                           int max_iters = 10000, double tol = 1e-8);

// Projection of the MLE onto the W-ball through the transformation
//   g(w) = sum_l sigma(<dphi_l, w>) dphi_l + lambda w,
// minimizing ||g(w) - g(w_mle)||_{V^-1} with V = kappa_lambda I + sum dphi dphi^T,
// by projected gradient descent.
WeightEstimate project_weights(const Eigen::VectorXd& w_mle,
                               const std::vector<PreferenceRecord>& records, double lambda,
                               double kappa_lambda, double W, int max_iters = 5000);

// Regularized design matrix with a maintained inverse (rank-1 updates via
// Sherman-Morrison, periodically refreshed from a direct factorization).
class DataMatrix {
 public:
  DataMatrix(int d, double reg);  // reg * I

  void rank_one_update(const Eigen::VectorXd& x);  // V += x x^T
  double mahalanobis(const Eigen::VectorXd& x) const;  // sqrt(x^T V^-1 x)

  const Eigen::MatrixXd& matrix() const { return v_; }
  const Eigen::MatrixXd& inverse() const { return inv_; }
  double log_det() const { return log_det_; }

 private:
  Eigen::MatrixXd v_;
  Eigen::MatrixXd inv_;
  double log_det_;
  int updates_since_refresh_ = 0;
};

// Confidence-width pieces and the filter width gamma_t:
//   beta_t = sqrt(lambda) W + sqrt(log(1/delta) + 2 d log(1 + t B^2/(kappa lambda d)))
//   alpha_{d,T} = 20 B W sqrt(d log(T (1+2T)/delta))
//   gamma_t = sqrt(2) (4 kappa beta_t + alpha_{d,T}) + 2 sqrt(sum bonuses^2) + 1/t
double beta_t(long long t, int d, double B, double W, double lambda, double delta, double kappa);
double alpha_dT(long long T, int d, double B, double W, double delta);
double gamma_theoretical(long long t, long long T, int d, double B, double W, double lambda,
                         double delta, double kappa, const std::vector<double>& bonus_history);

}  // namespace bridge
