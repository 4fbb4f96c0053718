#include "bridge/mdp.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace bridge {

void Kernel::validate(double tol) const {
  if (n_states <= 0 || n_actions <= 0) throw std::invalid_argument("Kernel: empty dims");
  if (p.size() != static_cast<size_t>(n_states) * n_actions * n_states)
    throw std::invalid_argument("Kernel: bad storage size");
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        double v = at(s, a, s2);
        if (v < 0.0) throw std::invalid_argument("Kernel: negative probability");
        sum += v;
      }
      if (std::abs(sum - 1.0) > tol) throw std::invalid_argument("Kernel: row does not sum to 1");
    }
  }
}

void TabularMDP::validate(double tol) const {
  if (horizon <= 0) throw std::invalid_argument("TabularMDP: nonpositive horizon");
  transitions.validate(tol);
  if (transitions.n_states != n_states || transitions.n_actions != n_actions)
    throw std::invalid_argument("TabularMDP: kernel dims mismatch");
  if (static_cast<int>(initial_dist.size()) != n_states ||
      static_cast<int>(rewards.size()) != n_states)
    throw std::invalid_argument("TabularMDP: vector dims mismatch");
  double sum = 0.0;
  for (double v : initial_dist) {
    if (v < 0.0) throw std::invalid_argument("TabularMDP: negative initial probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) throw std::invalid_argument("TabularMDP: d0 does not sum to 1");
}

Trajectory sample_trajectory(const TabularMDP& mdp, const DeterministicPolicy& policy, Rng& rng) {
  Trajectory traj;
  traj.states.reserve(mdp.horizon + 1);
  traj.actions.reserve(mdp.horizon);
  int s = sample_index(mdp.initial_dist, rng);
  traj.states.push_back(s);
  for (int h = 0; h < mdp.horizon; ++h) {
    int a = policy[s];
    traj.actions.push_back(a);
    s = sample_index(mdp.transitions.row(s, a), mdp.n_states, rng);
    traj.states.push_back(s);
  }
  return traj;
}

double trajectory_return(const TabularMDP& mdp, const Trajectory& traj) {
  double total = 0.0;
  for (int s : traj.states) total += mdp.rewards[s];
  return total;
}

std::vector<double> state_distribution(const Kernel& P, const std::vector<double>& d0,
                                       const DeterministicPolicy& policy, int t) {
  int S = P.n_states;
  std::vector<double> dist = d0;
  std::vector<double> next(S, 0.0);
  for (int step = 0; step < t; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      double mass = dist[s];
      if (mass == 0.0) continue;
      const double* row = P.row(s, policy[s]);
      for (int s2 = 0; s2 < S; ++s2) next[s2] += mass * row[s2];
    }
    dist.swap(next);
  }
  return dist;
}

double expected_return(const TabularMDP& mdp, const DeterministicPolicy& policy) {
  int S = mdp.n_states;
  std::vector<double> dist = mdp.initial_dist;
  std::vector<double> next(S, 0.0);
  double total = 0.0;
  for (int s = 0; s < S; ++s) total += dist[s] * mdp.rewards[s];
  for (int h = 0; h < mdp.horizon; ++h) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      double mass = dist[s];
      if (mass == 0.0) continue;
      const double* row = mdp.transitions.row(s, policy[s]);
      for (int s2 = 0; s2 < S; ++s2) next[s2] += mass * row[s2];
    }
    dist.swap(next);
    for (int s = 0; s < S; ++s) total += dist[s] * mdp.rewards[s];
  }
  return total;
}

double monte_carlo_return(const TabularMDP& mdp, const DeterministicPolicy& policy,
                          long long n_rollouts, Rng& rng) {
  if (n_rollouts < 1) throw std::invalid_argument("monte_carlo_return: n_rollouts must be >= 1");
  double total = 0.0;
  for (long long i = 0; i < n_rollouts; ++i) {
    Trajectory traj = sample_trajectory(mdp, policy, rng);
    total += trajectory_return(mdp, traj);
  }
  return total / static_cast<double>(n_rollouts);
}

std::vector<double> occupancy(const Kernel& P, const std::vector<double>& d0,
                              const DeterministicPolicy& policy, int H) {
  int S = P.n_states;
  int A = P.n_actions;
  std::vector<double> occ(static_cast<size_t>(H) * S * A, 0.0);
  std::vector<double> dist = d0;
  std::vector<double> next(S, 0.0);
  for (int t = 0; t < H; ++t) {
    double* slice = occ.data() + static_cast<size_t>(t) * S * A;
    for (int s = 0; s < S; ++s) slice[s * A + policy[s]] = dist[s];
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      double mass = dist[s];
      if (mass == 0.0) continue;
      const double* row = P.row(s, policy[s]);
      for (int s2 = 0; s2 < S; ++s2) next[s2] += mass * row[s2];
    }
    dist.swap(next);
  }
  return occ;
}

std::vector<double> occupancy(const TabularMDP& mdp, const DeterministicPolicy& policy) {
  return occupancy(mdp.transitions, mdp.initial_dist, policy, mdp.horizon);
}

DeterministicPolicy optimal_policy(const TabularMDP& mdp) {
  int S = mdp.n_states;
  int A = mdp.n_actions;
  int H = mdp.horizon;
  // Backward induction over the nonstationary value function; record the
  // greedy stationary extraction at every stage.
  std::vector<double> v(mdp.rewards);  // V_H
  std::vector<std::vector<int>> greedy(H, std::vector<int>(S, 0));
  for (int h = H - 1; h >= 0; --h) {
    std::vector<double> v_new(S, 0.0);
    for (int s = 0; s < S; ++s) {
      double best_q = -1e300;
      int best_a = 0;
      for (int a = 0; a < A; ++a) {
        const double* row = mdp.transitions.row(s, a);
        double q = 0.0;
        for (int s2 = 0; s2 < S; ++s2) q += row[s2] * v[s2];
        if (q > best_q + 1e-12) {
          best_q = q;
          best_a = a;
        }
      }
      greedy[h][s] = best_a;
      v_new[s] = mdp.rewards[s] + best_q;
    }
    v.swap(v_new);
  }
  // Evaluate every stage's greedy extraction exactly and keep the best.
  DeterministicPolicy best = greedy[0];
  double best_ret = expected_return(mdp, best);
  for (int h = 1; h < H; ++h) {
    double r = expected_return(mdp, greedy[h]);
    if (r > best_ret + 1e-12) {
      best_ret = r;
      best = greedy[h];
    }
  }
  // Deterministic coordinate ascent over single-state action swaps; finishes
  // the job when the greedy extraction is not the stationary optimum.
  bool improved = true;
  int sweeps = 0;
  while (improved && sweeps < 100) {
    improved = false;
    ++sweeps;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        if (a == best[s]) continue;
        DeterministicPolicy trial = best;
        trial[s] = a;
        double r = expected_return(mdp, trial);
        if (r > best_ret + 1e-12) {
          best_ret = r;
          best = trial;
          improved = true;
        }
      }
    }
  }
  return best;
}

TabularMDP build_star_mdp() {
  // 5 states around a hub: s0 -right- s1 -{right: s2, up: s4, down: s3}.
  // Actions: 0=right, 1=left, 2=up, 3=down.  Listed moves succeed with 0.7;
  // the failure mass moves the agent uniformly to the states other than the
  // current one and the intended target.  Unlisted moves keep the agent in
  // place with probability 1.
  const int S = 5, A = 4, H = 8;
  TabularMDP mdp;
  mdp.n_states = S;
  mdp.n_actions = A;
  mdp.horizon = H;
  mdp.transitions = Kernel(S, A);
  mdp.initial_dist.assign(S, 0.0);
  mdp.initial_dist[0] = 1.0;
  mdp.rewards.assign(S, 0.0);
  mdp.rewards[2] = 6.0;
  mdp.rewards[3] = -1.0;
  mdp.rewards[4] = 10.0;

  // (state, action) -> target for the solid arrows.
  const int edges[][3] = {
      {0, 0, 1},  // s0 right -> s1
      {1, 1, 0},  // s1 left  -> s0
      {1, 0, 2},  // s1 right -> s2
      {2, 1, 1},  // s2 left  -> s1
      {1, 3, 3},  // s1 down  -> s3
      {3, 2, 1},  // s3 up    -> s1
      {1, 2, 4},  // s1 up    -> s4
      {4, 3, 1},  // s4 down  -> s1
  };
  // Default: everything is an impossible action (stay put).
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) mdp.transitions.at(s, a, s) = 1.0;
  for (const auto& e : edges) {
    int s = e[0], a = e[1], target = e[2];
    double* row = mdp.transitions.row(s, a);
    for (int s2 = 0; s2 < S; ++s2) row[s2] = 0.0;
    row[target] = 0.7;
    for (int s2 = 0; s2 < S; ++s2)
      if (s2 != s && s2 != target) row[s2] = 0.3 / (S - 2);
  }
  mdp.validate();
  return mdp;
}

TabularMDP build_gridworld(double p_succ) {
  // 4x4 grid, state = row*4 + col, row 0 at the top, start at (0,0).
  // Actions: 0=up, 1=left, 2=down, 3=right, 4=stay.  A move action executes
  // the intended direction with probability p_succ and one of the other three
  // directions otherwise; directions blocked by the grid edge or a wall get
  // probability 0 with their mass redistributed equally over the unblocked
  // directions.  Cell (2,1) holds reward 20 but is walled off on all four
  // sides, so it is unreachable.
  if (p_succ <= 0.0 || p_succ > 1.0)
    throw std::invalid_argument("build_gridworld: p_succ out of range");
  const int ROWS = 4, COLS = 4;
  const int S = ROWS * COLS, A = 5, H = 10;
  TabularMDP mdp;
  mdp.n_states = S;
  mdp.n_actions = A;
  mdp.horizon = H;
  mdp.transitions = Kernel(S, A);
  mdp.initial_dist.assign(S, 0.0);
  mdp.initial_dist[0] = 1.0;
  mdp.rewards.assign(S, 0.0);
  auto idx = [&](int r, int c) { return r * COLS + c; };
  mdp.rewards[idx(3, 3)] = 10.0;
  mdp.rewards[idx(0, 2)] = -1.0;
  mdp.rewards[idx(0, 3)] = -1.0;
  mdp.rewards[idx(1, 2)] = -1.0;
  mdp.rewards[idx(1, 3)] = -1.0;
  mdp.rewards[idx(2, 1)] = 20.0;  // enclosed by walls; unreachable
  const int walled = idx(2, 1);

  const int dr[4] = {-1, 0, 1, 0};  // up, left, down, right
  const int dc[4] = {0, -1, 0, 1};
  for (int r = 0; r < ROWS; ++r) {
    for (int c = 0; c < COLS; ++c) {
      int s = idx(r, c);
      // stay
      mdp.transitions.at(s, 4, s) = 1.0;
      for (int a = 0; a < 4; ++a) {
        // Mass per executed direction before blocking.
        double mass[4];
        for (int d = 0; d < 4; ++d) mass[d] = (d == a) ? p_succ : (1.0 - p_succ) / 3.0;
        bool valid[4];
        int n_valid = 0;
        double blocked_mass = 0.0;
        int target[4];
        for (int d = 0; d < 4; ++d) {
          int nr = r + dr[d], nc = c + dc[d];
          bool ok = nr >= 0 && nr < ROWS && nc >= 0 && nc < COLS;
          if (ok) {
            int t = idx(nr, nc);
            // walls block any crossing into or out of the enclosed cell
            if (t == walled || s == walled) ok = false;
            target[d] = t;
          }
          valid[d] = ok;
          if (ok)
            ++n_valid;
          else
            blocked_mass += mass[d];
        }
        double* row = mdp.transitions.row(s, a);
        if (n_valid == 0) {
          row[s] = 1.0;  // fully enclosed (only the walled cell itself)
          continue;
        }
        double extra = blocked_mass / n_valid;
        for (int d = 0; d < 4; ++d)
          if (valid[d]) row[target[d]] += mass[d] + extra;
      }
    }
  }
  mdp.validate();
  return mdp;
}

TabularMDP build_env(const std::string& name, double p_succ) {
  if (name == "star") return build_star_mdp();
  if (name == "gridworld") return build_gridworld(p_succ);
  throw std::invalid_argument("build_env: unknown environment '" + name + "'");
}

}  // namespace bridge
