#include "bridge/preference.hpp"

#include <cmath>
#include <stdexcept>

namespace bridge {

EmbeddingKind embedding_kind_from_name(const std::string& name) {
  if (name == "identity_long") return EmbeddingKind::kIdentityLong;
  if (name == "identity_short") return EmbeddingKind::kIdentityShort;
  if (name == "state_counts") return EmbeddingKind::kStateCounts;
  if (name == "final_state") return EmbeddingKind::kFinalState;
  throw std::invalid_argument("unknown embedding kind '" + name + "'");
}

std::string embedding_kind_name(EmbeddingKind kind) {
  switch (kind) {
    case EmbeddingKind::kIdentityLong: return "identity_long";
    case EmbeddingKind::kIdentityShort: return "identity_short";
    case EmbeddingKind::kStateCounts: return "state_counts";
    case EmbeddingKind::kFinalState: return "final_state";
  }
  throw std::invalid_argument("unknown embedding kind");
}

Embedding make_embedding(EmbeddingKind kind, int n_states, int n_actions, int H) {
  Embedding emb{kind, n_states, n_actions, H, 0, 0.0};
  switch (kind) {
    case EmbeddingKind::kIdentityLong:
      emb.d = H * (n_states + n_actions);
      emb.B = std::sqrt(2.0 * H);
      break;
    case EmbeddingKind::kIdentityShort:
      emb.d = n_states + n_actions;
      emb.B = std::sqrt(2.0) * H;
      break;
    case EmbeddingKind::kStateCounts:
      emb.d = n_states;
      emb.B = static_cast<double>(H);
      break;
    case EmbeddingKind::kFinalState:
      emb.d = n_states;
      emb.B = 1.0;
      break;
  }
  return emb;
}

Eigen::VectorXd embed(const Embedding& emb, const Trajectory& traj) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(emb.d);
  int S = emb.n_states, A = emb.n_actions, H = emb.H;
  switch (emb.kind) {
    case EmbeddingKind::kIdentityLong:
      for (int t = 0; t < H; ++t) {
        int off = t * (S + A);
        v[off + traj.states[t]] += 1.0;
        v[off + S + traj.actions[t]] += 1.0;
      }
      break;
    case EmbeddingKind::kIdentityShort:
      for (int t = 0; t < H; ++t) {
        v[traj.states[t]] += 1.0;
        v[S + traj.actions[t]] += 1.0;
      }
      break;
    case EmbeddingKind::kStateCounts:
      for (int t = 0; t < H; ++t) v[traj.states[t]] += 1.0;
      break;
    case EmbeddingKind::kFinalState:
      v[traj.states[H]] = 1.0;
      break;
  }
  return v;
}

Eigen::VectorXd policy_embedding(const Embedding& emb, const DeterministicPolicy& policy,
                                 const Kernel& P, const std::vector<double>& d0,
                                 EmbeddingMode mode, long long n_rollouts, Rng* rng) {
  int S = emb.n_states, A = emb.n_actions, H = emb.H;
  if (mode == EmbeddingMode::kMonteCarlo) {
    if (n_rollouts < 1 || rng == nullptr)
      throw std::invalid_argument("policy_embedding: mc mode needs n_rollouts >= 1 and an rng");
    TabularMDP tmp;
    tmp.n_states = S;
    tmp.n_actions = A;
    tmp.horizon = H;
    tmp.transitions = P;
    tmp.initial_dist = d0;
    tmp.rewards.assign(S, 0.0);
    Eigen::VectorXd total = Eigen::VectorXd::Zero(emb.d);
    for (long long i = 0; i < n_rollouts; ++i)
      total += embed(emb, sample_trajectory(tmp, policy, *rng));
    return total / static_cast<double>(n_rollouts);
  }
  std::vector<double> occ = occupancy(P, d0, policy, H);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(emb.d);
  if (emb.kind == EmbeddingKind::kFinalState) {
    std::vector<double> dist = state_distribution(P, d0, policy, H);
    for (int s = 0; s < S; ++s) v[s] = dist[s];
    return v;
  }
  for (int t = 0; t < H; ++t) {
    const double* slice = occ.data() + static_cast<size_t>(t) * S * A;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double mass = slice[s * A + a];
        if (mass == 0.0) continue;
        switch (emb.kind) {
          case EmbeddingKind::kIdentityLong: {
            int off = t * (S + A);
            v[off + s] += mass;
            v[off + S + a] += mass;
            break;
          }
          case EmbeddingKind::kIdentityShort:
            v[s] += mass;
            v[S + a] += mass;
            break;
          case EmbeddingKind::kStateCounts:
            v[s] += mass;
            break;
          case EmbeddingKind::kFinalState:
            break;  // handled above
        }
      }
    }
  }
  return v;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

int oracle_bt(const Eigen::VectorXd& delta_phi, const Eigen::VectorXd& w_star, Rng& rng) {
  double p = sigmoid(delta_phi.dot(w_star));
  return uniform01(rng) < p ? 1 : 0;
}

int oracle_deterministic(double return1, double return2) { return return1 >= return2 ? 1 : 0; }

double kappa(double B, double W) {
  if (B < 0.0 || W < 0.0) throw std::invalid_argument("kappa: B, W must be >= 0");
  double s = sigmoid(W * B);
  return 1.0 / (s * (1.0 - s));
}

namespace {
// log(1 + e^z) without overflow
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
}  // namespace

double log_likelihood(const std::vector<PreferenceRecord>& records, double lambda,
                      const Eigen::VectorXd& w) {
  double total = -0.5 * lambda * w.squaredNorm();
  for (const auto& rec : records) {
    double z = rec.delta_phi.dot(w);
    total += rec.outcome * z - softplus(z);
  }
  return total;
}

Eigen::VectorXd log_likelihood_gradient(const std::vector<PreferenceRecord>& records,
                                        double lambda, const Eigen::VectorXd& w) {
  Eigen::VectorXd g = -lambda * w;
  for (const auto& rec : records) {
    double z = rec.delta_phi.dot(w);
    g += (rec.outcome - sigmoid(z)) * rec.delta_phi;
  }
  return g;
}

WeightEstimate mle_weights(const std::vector<PreferenceRecord>& records, int d, double lambda,
                           int max_iters, double tol) {
  if (lambda <= 0.0) throw std::invalid_argument("mle_weights: lambda must be > 0");
  // normalized all-ones initialization
  Eigen::VectorXd w = Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  WeightEstimate est;
  for (int iter = 0; iter < max_iters; ++iter) {
    Eigen::VectorXd g = log_likelihood_gradient(records, lambda, w);
    double gnorm = g.norm();
    if (gnorm <= tol) {
      est.w = w;
      est.grad_norm = gnorm;
      est.converged = true;
      return est;
    }
    Eigen::MatrixXd hess = -lambda * Eigen::MatrixXd::Identity(d, d);
    for (const auto& rec : records) {
      double z = rec.delta_phi.dot(w);
      double s = sigmoid(z);
      hess.noalias() -= (s * (1.0 - s)) * rec.delta_phi * rec.delta_phi.transpose();
    }
    Eigen::VectorXd step = -hess.ldlt().solve(g);  // Newton ascent direction
    double f0 = log_likelihood(records, lambda, w);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd cand = w + t * step;
      if (log_likelihood(records, lambda, cand) > f0 - 1e-15) {
        w = cand;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // fall back to a small gradient step
      w += (1e-3 / (1.0 + gnorm)) * g;
    }
  }
  est.w = w;
  est.grad_norm = log_likelihood_gradient(records, lambda, w).norm();
  est.converged = est.grad_norm <= 1e-6 * (1.0 + w.norm());
  return est;
}

namespace {

Eigen::VectorXd transform_g(const std::vector<PreferenceRecord>& records, double lambda,
                            const Eigen::VectorXd& w) {
  Eigen::VectorXd g = lambda * w;
  for (const auto& rec : records) g += sigmoid(rec.delta_phi.dot(w)) * rec.delta_phi;
  return g;
}

}  // namespace

WeightEstimate project_weights(const Eigen::VectorXd& w_mle,
                               const std::vector<PreferenceRecord>& records, double lambda,
                               double kappa_lambda, double W, int max_iters) {
  WeightEstimate est;
  if (w_mle.norm() <= W) {
    est.w = w_mle;
    return est;
  }
  est.is_projected = true;
  int d = static_cast<int>(w_mle.size());
  Eigen::MatrixXd v = kappa_lambda * Eigen::MatrixXd::Identity(d, d);
  for (const auto& rec : records) v.noalias() += rec.delta_phi * rec.delta_phi.transpose();
  Eigen::LDLT<Eigen::MatrixXd> v_fact(v);
  Eigen::VectorXd g_target = transform_g(records, lambda, w_mle);

  auto objective = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd r = transform_g(records, lambda, w) - g_target;
    return r.dot(v_fact.solve(r));
  };
  Eigen::VectorXd w = W * w_mle / w_mle.norm();
  double f = objective(w);
  double step = 1.0 / (lambda + kappa_lambda + static_cast<double>(records.size()));
  for (int iter = 0; iter < max_iters; ++iter) {
    Eigen::VectorXd r = transform_g(records, lambda, w) - g_target;
    Eigen::VectorXd vinv_r = v_fact.solve(r);
    // J(w) = sum sigma'(z) dphi dphi^T + lambda I (symmetric)
    Eigen::VectorXd grad = 2.0 * lambda * vinv_r;
    for (const auto& rec : records) {
      double z = rec.delta_phi.dot(w);
      double s = sigmoid(z);
      grad += 2.0 * (s * (1.0 - s)) * rec.delta_phi.dot(vinv_r) * rec.delta_phi;
    }
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd cand = w - step * grad;
      double n = cand.norm();
      if (n > W) cand *= W / n;
      double fc = objective(cand);
      if (fc < f - 1e-18) {
        double disp = (cand - w).norm();
        w = cand;
        f = fc;
        step *= 1.2;
        moved = true;
        if (disp < 1e-12) iter = max_iters;  // converged
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  est.w = w;
  est.converged = true;
  return est;
}

DataMatrix::DataMatrix(int d, double reg)
    : v_(reg * Eigen::MatrixXd::Identity(d, d)),
      inv_((1.0 / reg) * Eigen::MatrixXd::Identity(d, d)),
      log_det_(d * std::log(reg)) {
  if (reg <= 0.0) throw std::invalid_argument("DataMatrix: regularization must be > 0");
}

void DataMatrix::rank_one_update(const Eigen::VectorXd& x) {
  v_.noalias() += x * x.transpose();
  Eigen::VectorXd ix = inv_ * x;
  double denom = 1.0 + x.dot(ix);
  log_det_ += std::log(denom);
  inv_.noalias() -= (ix * ix.transpose()) / denom;
  if (++updates_since_refresh_ >= 64) {
    // keep the Sherman-Morrison inverse from drifting
    inv_ = v_.ldlt().solve(Eigen::MatrixXd::Identity(v_.rows(), v_.cols()));
    updates_since_refresh_ = 0;
  }
}

double DataMatrix::mahalanobis(const Eigen::VectorXd& x) const {
  double q = x.dot(inv_ * x);
  return q > 0.0 ? std::sqrt(q) : 0.0;
}

double beta_t(long long t, int d, double B, double W, double lambda, double delta, double kappa) {
  return std::sqrt(lambda) * W +
         std::sqrt(std::log(1.0 / delta) +
                   2.0 * d * std::log(1.0 + static_cast<double>(t) * B * B / (kappa * lambda * d)));
}

double alpha_dT(long long T, int d, double B, double W, double delta) {
  double Td = static_cast<double>(T);
  return 20.0 * B * W * std::sqrt(d * std::log(Td * (1.0 + 2.0 * Td) / delta));
}

double gamma_theoretical(long long t, long long T, int d, double B, double W, double lambda,
                         double delta, double kappa, const std::vector<double>& bonus_history) {
  if (t < 1) throw std::invalid_argument("gamma_theoretical: t must be >= 1");
  double bonus_sq = 0.0;
  for (double b : bonus_history) bonus_sq += b * b;
  return std::sqrt(2.0) * (4.0 * kappa * beta_t(t, d, B, W, lambda, delta, kappa) +
                           alpha_dT(T, d, B, W, delta)) +
         2.0 * std::sqrt(bonus_sq) + 1.0 / static_cast<double>(t);
}

}  // namespace bridge
