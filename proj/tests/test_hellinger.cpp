#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "bridge/hellinger.hpp"
#include "bridge/preference.hpp"
#include "test_util.hpp"

using namespace bridge;

TEST_CASE("identical arguments give zero distance") {
  Rng rng = seed_stream(10, 0, "h0");
  TabularMDP mdp = testutil::random_mdp(4, 3, 5, rng);
  DeterministicPolicy pi = testutil::random_policy(4, 3, rng);
  double h2 = squared_hellinger(mdp.transitions, pi, mdp.transitions, pi, mdp.initial_dist, 5);
  CHECK(h2 == doctest::Approx(0.0).epsilon(1e-12));
  double bf = brute_force_squared_hellinger(mdp.transitions, pi, mdp.transitions, pi,
                                            mdp.initial_dist, 5);
  CHECK(bf == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("disagreement at a point-mass start gives distance one") {
  Rng rng = seed_stream(11, 0, "h1");
  TabularMDP mdp = testutil::random_mdp(3, 2, 3, rng);
  std::vector<double> d0 = {1.0, 0.0, 0.0};
  DeterministicPolicy pi1 = {0, 0, 0};
  DeterministicPolicy pi2 = {1, 0, 0};
  CHECK(squared_hellinger(mdp.transitions, pi1, mdp.transitions, pi2, d0, 3) ==
        doctest::Approx(1.0));
}

TEST_CASE("recursion matches brute force on random instances") {
  Rng rng = seed_stream(12, 0, "h2");
  for (int i = 0; i < 100; ++i) {
    int S = 2 + static_cast<int>(rng() % 3);  // 2..4
    int A = 1 + static_cast<int>(rng() % 3);  // 1..3
    int H = 1 + static_cast<int>(rng() % 4);  // 1..4
    TabularMDP m1 = testutil::random_mdp(S, A, H, rng);
    TabularMDP m2 = testutil::random_mdp(S, A, H, rng);
    DeterministicPolicy pi1 = testutil::random_policy(S, A, rng);
    DeterministicPolicy pi2 = testutil::random_policy(S, A, rng);
    double fast = squared_hellinger(m1.transitions, pi1, m2.transitions, pi2, m1.initial_dist, H);
    double brute =
        brute_force_squared_hellinger(m1.transitions, pi1, m2.transitions, pi2, m1.initial_dist, H);
    CHECK(std::abs(fast - brute) <= 1e-10);
    CHECK(fast >= 0.0);
    CHECK(fast <= 1.0);
    // symmetry
    double rev = squared_hellinger(m2.transitions, pi2, m1.transitions, pi1, m1.initial_dist, H);
    CHECK(std::abs(fast - rev) <= 1e-12);
  }
}

TEST_CASE("same dynamics equals one minus agreement-trajectory probability") {
  Rng rng = seed_stream(13, 0, "h3");
  for (int i = 0; i < 20; ++i) {
    TabularMDP mdp = testutil::random_mdp(4, 2, 4, rng);
    DeterministicPolicy pi1 = testutil::random_policy(4, 2, rng);
    DeterministicPolicy pi2 = testutil::random_policy(4, 2, rng);
    // forward DP restricted to agreement states
    std::vector<double> mass = mdp.initial_dist;
    for (int s = 0; s < 4; ++s)
      if (pi1[s] != pi2[s]) mass[s] = 0.0;
    for (int h = 0; h < 4; ++h) {
      std::vector<double> next(4, 0.0);
      for (int s = 0; s < 4; ++s) {
        if (mass[s] == 0.0) continue;
        const double* row = mdp.transitions.row(s, pi1[s]);
        for (int s2 = 0; s2 < 4; ++s2) next[s2] += mass[s] * row[s2];
      }
      // a trajectory stays an agreement trajectory while policies agree,
      // except at the final state where no action is taken
      if (h + 1 < 4)
        for (int s = 0; s < 4; ++s)
          if (pi1[s] != pi2[s]) next[s] = 0.0;
      mass = next;
    }
    double agreement = 0.0;
    for (double v : mass) agreement += v;
    double h2 =
        squared_hellinger(mdp.transitions, pi1, mdp.transitions, pi2, mdp.initial_dist, 4);
    CHECK(std::abs(h2 - (1.0 - agreement)) <= 1e-10);
  }
}

TEST_CASE("brute force guards against huge enumerations") {
  Rng rng = seed_stream(14, 0, "h4");
  TabularMDP mdp = testutil::random_mdp(4, 2, 12, rng);
  DeterministicPolicy pi = testutil::random_policy(4, 2, rng);
  CHECK_THROWS_AS(brute_force_squared_hellinger(mdp.transitions, pi, mdp.transitions, pi,
                                                mdp.initial_dist, 12, 1000),
                  std::invalid_argument);
}

TEST_CASE("tv_upper_bound") {
  CHECK(tv_upper_bound(0.0) == doctest::Approx(0.0));
  CHECK(tv_upper_bound(0.5) == doctest::Approx(1.0));
  CHECK(tv_upper_bound(0.02) == doctest::Approx(0.2));
  CHECK_THROWS_AS(tv_upper_bound(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(tv_upper_bound(1.1), std::invalid_argument);
}

TEST_CASE("moment bound holds for exact policy embeddings") {
  // ||phi(pi1) - phi(pi2)||_2 <= 2 sqrt(2) B sqrt(H2) on a 3-state MDP
  Rng rng = seed_stream(15, 0, "moment");
  TabularMDP mdp = testutil::random_mdp(3, 2, 4, rng);
  for (EmbeddingKind kind : {EmbeddingKind::kIdentityShort, EmbeddingKind::kStateCounts,
                             EmbeddingKind::kFinalState}) {
    Embedding emb = make_embedding(kind, 3, 2, 4);
    for (int i = 0; i < 200; ++i) {
      DeterministicPolicy pi1 = testutil::random_policy(3, 2, rng);
      DeterministicPolicy pi2 = testutil::random_policy(3, 2, rng);
      Eigen::VectorXd p1 = policy_embedding(emb, pi1, mdp.transitions, mdp.initial_dist);
      Eigen::VectorXd p2 = policy_embedding(emb, pi2, mdp.transitions, mdp.initial_dist);
      double h2 = squared_hellinger(mdp.transitions, pi1, mdp.transitions, pi2,
                                    mdp.initial_dist, 4);
      CHECK((p1 - p2).norm() <= 2.0 * std::sqrt(2.0) * emb.B * std::sqrt(h2) + 1e-10);
    }
  }
}
