#pragma once

#include <vector>

#include "bridge/mdp.hpp"

namespace bridge {

// Bhattacharyya agreement matrix M[s][s'] =
//   sqrt(P1(s'|s,pi1(s)) * P2(s'|s,pi2(s))) * 1{pi1(s) = pi2(s)}.
// Rows where the policies disagree are all-zero.
std::vector<double> agreement_matrix(const Kernel& P1, const DeterministicPolicy& pi1,
                                     const Kernel& P2, const DeterministicPolicy& pi2);

// Squared Hellinger distance between the two trajectory distributions,
// computed as 1 - sum_i [M^H d0]_i with H matrix-vector products.
// Result clamped to [0, 1].
double squared_hellinger(const Kernel& P1, const DeterministicPolicy& pi1,
                         const Kernel& P2, const DeterministicPolicy& pi2,
                         const std::vector<double>& d0, int H);

// Definitional sum over all enumerated trajectories; test oracle only.
// Throws std::invalid_argument when |S|^H exceeds max_terms.
double brute_force_squared_hellinger(const Kernel& P1, const DeterministicPolicy& pi1,
                                     const Kernel& P2, const DeterministicPolicy& pi2,
                                     const std::vector<double>& d0, int H,
                                     long long max_terms = 1000000);

// Total-variation upper bound sqrt(2 * h2); h2 must lie in [0, 1].
double tv_upper_bound(double h2);

}  // namespace bridge
