#include "bridge/hellinger.hpp"

#include <cmath>
#include <stdexcept>

namespace bridge {

std::vector<double> agreement_matrix(const Kernel& P1, const DeterministicPolicy& pi1,
                                     const Kernel& P2, const DeterministicPolicy& pi2) {
  int S = P1.n_states;
  if (P2.n_states != S) throw std::invalid_argument("agreement_matrix: state-count mismatch");
  std::vector<double> m(static_cast<size_t>(S) * S, 0.0);
  for (int s = 0; s < S; ++s) {
    if (pi1[s] != pi2[s]) continue;  // disagreement row stays zero
    const double* r1 = P1.row(s, pi1[s]);
    const double* r2 = P2.row(s, pi2[s]);
    for (int s2 = 0; s2 < S; ++s2) m[static_cast<size_t>(s) * S + s2] = std::sqrt(r1[s2] * r2[s2]);
  }
  return m;
}

double squared_hellinger(const Kernel& P1, const DeterministicPolicy& pi1,
                         const Kernel& P2, const DeterministicPolicy& pi2,
                         const std::vector<double>& d0, int H) {
  int S = P1.n_states;
  std::vector<double> m = agreement_matrix(P1, pi1, P2, pi2);
  std::vector<double> x = d0;
  std::vector<double> next(S, 0.0);
  for (int h = 0; h < H; ++h) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      double mass = x[s];
      if (mass == 0.0) continue;
      const double* row = m.data() + static_cast<size_t>(s) * S;
      for (int s2 = 0; s2 < S; ++s2) next[s2] += mass * row[s2];
    }
    x.swap(next);
  }
  double bc = 0.0;  // Bhattacharyya coefficient
  for (double v : x) bc += v;
  double h2 = 1.0 - bc;
  if (h2 < 0.0) h2 = 0.0;
  if (h2 > 1.0) h2 = 1.0;
  return h2;
}

namespace {

// Depth-first enumeration of state sequences; actions are pinned by the
// policies, so only P^{pi}(tau) over state paths is needed.
double enumerate_bc(const Kernel& P1, const DeterministicPolicy& pi1,
                    const Kernel& P2, const DeterministicPolicy& pi2,
                    int s, int depth, int H) {
  if (depth == H) return 1.0;
  if (pi1[s] != pi2[s]) return 0.0;  // trajectories carry different actions
  const double* r1 = P1.row(s, pi1[s]);
  const double* r2 = P2.row(s, pi2[s]);
  double total = 0.0;
  for (int s2 = 0; s2 < P1.n_states; ++s2) {
    double w = std::sqrt(r1[s2] * r2[s2]);
    if (w == 0.0) continue;
    total += w * enumerate_bc(P1, pi1, P2, pi2, s2, depth + 1, H);
  }
  return total;
}

}  // namespace

double brute_force_squared_hellinger(const Kernel& P1, const DeterministicPolicy& pi1,
                                     const Kernel& P2, const DeterministicPolicy& pi2,
                                     const std::vector<double>& d0, int H,
                                     long long max_terms) {
  int S = P1.n_states;
  double terms = std::pow(static_cast<double>(S), H);
  if (terms > static_cast<double>(max_terms))
    throw std::invalid_argument("brute_force_squared_hellinger: enumeration too large");
  double bc = 0.0;
  for (int s0 = 0; s0 < S; ++s0) {
    if (d0[s0] == 0.0) continue;
    bc += d0[s0] * enumerate_bc(P1, pi1, P2, pi2, s0, 0, H);
  }
  double h2 = 1.0 - bc;
  if (h2 < 0.0) h2 = 0.0;
  if (h2 > 1.0) h2 = 1.0;
  return h2;
}

double tv_upper_bound(double h2) {
  if (h2 < 0.0 || h2 > 1.0) throw std::invalid_argument("tv_upper_bound: h2 out of [0,1]");
  return std::sqrt(2.0 * h2);
}

}  // namespace bridge
