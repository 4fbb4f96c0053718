#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "bridge/harness.hpp"
#include "bridge/online.hpp"
#include "test_util.hpp"

using namespace bridge;

namespace {

ExperimentConfig small_star_config() {
  ExperimentConfig cfg;
  cfg.env = "star";
  cfg.n_offline = 20;
  cfg.T = 5;
  cfg.seeds = {1};
  cfg.radius_mode = "fixed";
  cfg.radius_value = 0.8;
  cfg.gamma_mode = "fixed";
  cfg.gamma_value = 1.0;
  cfg.pool_mode = "enumerate";
  cfg.output_dir = "unused";
  return cfg;
}

}  // namespace

TEST_CASE("VisitCounts bookkeeping") {
  VisitCounts counts(2, 2);
  Trajectory traj;
  traj.states = {0, 1, 0};
  traj.actions = {1, 0};
  counts.add_offline(traj);
  counts.add_online(traj);
  CHECK(counts.combined(0, 1) == 2);
  CHECK(counts.combined(1, 0) == 2);
  CHECK(counts.combined(0, 0) == 0);
  CHECK(counts.total_online() == 2);
}

TEST_CASE("combined_transition_estimate normalizes and falls back to uniform") {
  VisitCounts counts(2, 1);
  Trajectory a{{0, 1}, {0}}, b{{0, 0}, {0}}, c{{0, 1}, {0}}, d{{0, 1}, {0}};
  counts.add_offline(a);
  counts.add_offline(b);
  counts.add_online(c);
  counts.add_online(d);
  Kernel k = combined_transition_estimate(counts);
  CHECK(k.at(0, 0, 1) == doctest::Approx(0.75));
  CHECK(k.at(0, 0, 0) == doctest::Approx(0.25));
  CHECK(k.at(1, 0, 0) == doctest::Approx(0.5));  // unvisited row
  CHECK(k.at(1, 0, 1) == doctest::Approx(0.5));
}

TEST_CASE("xi_term formula, cap and monotonicity") {
  double eta = 3.0, lid = std::log(10.0);
  int H = 8, S = 5, A = 4;
  CHECK(xi_term(eta, lid, 0, H, S, A) == doctest::Approx(2.0 * eta));
  // exact value at N = 100
  double U = H * std::log(static_cast<double>(S) * A) +
             std::log(6.0 * std::log(100.0)) + lid;
  double expected = std::min(2.0 * eta, 4.0 * eta * std::sqrt(U / 100.0));
  CHECK(xi_term(eta, lid, 100, H, S, A) == doctest::Approx(expected).epsilon(1e-12));
  // decreasing for N large enough that the cap is inactive
  double prev = xi_term(eta, lid, 1000, H, S, A);
  for (long long n = 2000; n <= 1000000; n *= 2) {
    double v = xi_term(eta, lid, n, H, S, A);
    CHECK(v < prev);
    prev = v;
  }
  // huge counts drive the term toward zero
  CHECK(xi_term(eta, lid, 1000000000000LL, H, S, A) <= 1e-4 * eta);
}

TEST_CASE("bonus with zero counts is exactly 2 eta H") {
  VisitCounts counts(2, 2);
  Kernel p_hat(2, 2);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      for (int s2 = 0; s2 < 2; ++s2) p_hat.at(s, a, s2) = 0.5;
  std::vector<double> d0 = {1.0, 0.0};
  Rng rng = seed_stream(40, 0, "bz");
  double eta = 2.5;
  int H = 6;
  double mc = bonus({0, 1}, eta, std::log(10.0), counts, p_hat, d0, H, 10, rng);
  CHECK(mc == doctest::Approx(2.0 * eta * H).epsilon(1e-12));
  double exact = bonus_exact({0, 1}, eta, std::log(10.0), counts, p_hat, d0, H);
  CHECK(exact == doctest::Approx(2.0 * eta * H).epsilon(1e-12));
}

TEST_CASE("bonus Monte Carlo matches the exact occupancy oracle") {
  Rng rng = seed_stream(41, 0, "bx");
  TabularMDP mdp = testutil::random_mdp(2, 2, 5, rng);
  VisitCounts counts(2, 2);
  // uneven visitation so xi genuinely varies across (s,a)
  for (int i = 0; i < 50; ++i) counts.add_offline(Trajectory{{0, 1}, {0}});
  for (int i = 0; i < 3; ++i) counts.add_offline(Trajectory{{1, 0}, {1}});
  DeterministicPolicy pi = {0, 1};
  double eta = 1.0, lid = std::log(20.0);
  double exact = bonus_exact(pi, eta, lid, counts, mdp.transitions, mdp.initial_dist, 5);
  double mc = bonus(pi, eta, lid, counts, mdp.transitions, mdp.initial_dist, 5, 200000, rng);
  CHECK(std::abs(mc - exact) < 0.05);
  CHECK(exact > 0.0);
  CHECK(exact <= 2.0 * eta * 5 + 1e-12);
}

TEST_CASE("online_filter basics") {
  int k = 4, d = 2;
  Eigen::MatrixXd phi(k, d);
  phi << 1.0, 0.0, 0.8, 0.1, 0.2, 0.9, 0.0, 1.0;
  Eigen::VectorXd w(d);
  w << 1.0, 0.0;  // scores 1.0, 0.8, 0.2, 0.0
  DataMatrix v_bar(d, 1.0);
  std::vector<double> zeros(k, 0.0);

  SUBCASE("gamma 0 and no bonuses keep only the score argmax") {
    std::vector<int> kept = online_filter(phi, w, v_bar, 0.0, zeros);
    CHECK(kept == std::vector<int>{0});
  }
  SUBCASE("huge gamma keeps everything") {
    std::vector<int> kept = online_filter(phi, w, v_bar, 1e6, zeros);
    CHECK(kept.size() == static_cast<size_t>(k));
  }
  SUBCASE("bonuses can rescue a low-score candidate") {
    std::vector<double> bonuses = {0.0, 0.0, 0.0, 1.5};
    std::vector<int> kept = online_filter(phi, w, v_bar, 0.0, bonuses);
    CHECK(std::find(kept.begin(), kept.end(), 3) != kept.end());
    CHECK(std::find(kept.begin(), kept.end(), 0) != kept.end());
  }
  SUBCASE("singleton input survives") {
    Eigen::MatrixXd one = phi.topRows(1);
    std::vector<int> kept = online_filter(one, w, v_bar, 0.0, {0.0});
    CHECK(kept == std::vector<int>{0});
  }
}

TEST_CASE("online_filter always keeps the score argmax") {
  Rng rng = seed_stream(42, 0, "filt");
  for (int trial = 0; trial < 50; ++trial) {
    int k = 2 + static_cast<int>(rng() % 8), d = 3;
    Eigen::MatrixXd phi(k, d);
    for (int i = 0; i < k; ++i)
      for (int c = 0; c < d; ++c) phi(i, c) = uniform01(rng);
    Eigen::VectorXd w(d);
    for (int c = 0; c < d; ++c) w[c] = 2.0 * uniform01(rng) - 1.0;
    DataMatrix v_bar(d, 0.5 + uniform01(rng));
    for (int u = 0; u < 5; ++u) {
      Eigen::VectorXd x(d);
      for (int c = 0; c < d; ++c) x[c] = uniform01(rng);
      v_bar.rank_one_update(x);
    }
    std::vector<double> bonuses(k);
    for (double& b : bonuses) b = uniform01(rng);
    double gamma = uniform01(rng);
    std::vector<int> kept = online_filter(phi, w, v_bar, gamma, bonuses);
    CHECK(!kept.empty());
    Eigen::VectorXd scores = phi * w;
    int best = 0;
    for (int i = 1; i < k; ++i)
      if (scores[i] > scores[best]) best = i;
    CHECK(std::find(kept.begin(), kept.end(), best) != kept.end());
    // every kept index re-tests against the declared criterion
    for (int i : kept) {
      for (int j = 0; j < k; ++j) {
        Eigen::VectorXd diff = (phi.row(i) - phi.row(j)).transpose();
        double lhs = diff.dot(w) + gamma * v_bar.mahalanobis(diff) + bonuses[i] + bonuses[j];
        CHECK(lhs >= -1e-9);
      }
    }
  }
}

TEST_CASE("select_pair modes against an exhaustive oracle") {
  Rng rng = seed_stream(43, 0, "sel");
  int k = 10, d = 3;
  Eigen::MatrixXd phi(k, d);
  for (int i = 0; i < k; ++i)
    for (int c = 0; c < d; ++c) phi(i, c) = uniform01(rng);
  Eigen::VectorXd w(d);
  w << 0.7, -0.3, 0.5;
  DataMatrix v_bar(d, 1.0);
  std::vector<double> bonuses(k);
  for (double& b : bonuses) b = 0.3 * uniform01(rng);
  std::vector<int> pi_t;
  for (int i = 0; i < k; ++i) pi_t.push_back(i);
  double gamma = 0.8;

  auto maha = [&](int i, int j) {
    Eigen::VectorXd diff = (phi.row(i) - phi.row(j)).transpose();
    return v_bar.mahalanobis(diff);
  };

  SUBCASE("singleton duels itself") {
    std::vector<int> one = {7};
    CHECK(select_pair(one, phi, w, v_bar, gamma, bonuses, SelectionMode::kAlg1, rng) ==
          std::pair<int, int>{7, 7});
  }
  SUBCASE("alg1 maximizes gamma * distance + both bonuses") {
    auto got = select_pair(pi_t, phi, w, v_bar, gamma, bonuses, SelectionMode::kAlg1, rng);
    double best = -1e300;
    std::pair<int, int> oracle{0, 0};
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        double v = gamma * maha(i, j) + bonuses[i] + bonuses[j];
        if (v > best + 1e-15) {
          best = v;
          oracle = {i, j};
        }
      }
    CHECK(got == oracle);
  }
  SUBCASE("ucb pairs the score argmax with the optimistic challenger") {
    auto got = select_pair(pi_t, phi, w, v_bar, gamma, bonuses, SelectionMode::kUcb, rng);
    Eigen::VectorXd scores = phi * w;
    int bi = 0;
    for (int i = 1; i < k; ++i)
      if (scores[i] > scores[bi] + 1e-15) bi = i;
    CHECK(got.first == bi);
    double best = -1e300;
    int bj = 0;
    for (int j = 0; j < k; ++j) {
      double v = scores[j] + gamma * maha(bi, j);
      if (v > best + 1e-15) {
        best = v;
        bj = j;
      }
    }
    CHECK(got.second == bj);
  }
  SUBCASE("pure_uncertainty maximizes the distance alone") {
    auto got =
        select_pair(pi_t, phi, w, v_bar, gamma, bonuses, SelectionMode::kPureUncertainty, rng);
    CHECK(maha(got.first, got.second) >=
          maha(0, k - 1) - 1e-12);  // at least as far as an arbitrary pair
    double best = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) best = std::max(best, maha(i, j));
    CHECK(maha(got.first, got.second) == doctest::Approx(best).epsilon(1e-12));
  }
  SUBCASE("best_vs_random keeps the argmax on the left") {
    for (int rep = 0; rep < 20; ++rep) {
      auto got =
          select_pair(pi_t, phi, w, v_bar, gamma, bonuses, SelectionMode::kBestVsRandom, rng);
      Eigen::VectorXd scores = phi * w;
      int bi = 0;
      for (int i = 1; i < k; ++i)
        if (scores[i] > scores[bi] + 1e-15) bi = i;
      CHECK(got.first == bi);
      CHECK(got.second >= 0);
      CHECK(got.second < k);
    }
  }
}

TEST_CASE("run_bridge invariants") {
  TabularMDP env = build_star_mdp();
  ExperimentConfig cfg = small_star_config();
  DeterministicPolicy expert = optimal_policy(env);
  OfflineDataset data = make_dataset(env, expert, cfg, 1);

  SUBCASE("T = 0 returns the BC policy") {
    ExperimentConfig c0 = cfg;
    c0.T = 0;
    RunResult r = run_bridge(env, data, c0, 1);
    CHECK(r.records.empty());
    CHECK(r.best_policy == r.bc_policy);
    CHECK(r.final_best_regret == doctest::Approx(r.bc_regret));
  }
  SUBCASE("known dynamics zeroes the bonuses") {
    ExperimentConfig ck = cfg;
    ck.dynamics = "known";
    RunResult r = run_bridge(env, data, ck, 1);
    REQUIRE(!r.records.empty());
    for (const auto& rec : r.records) {
      CHECK(rec.bonus_1 == 0.0);
      CHECK(rec.bonus_2 == 0.0);
    }
  }
  SUBCASE("repeat runs are bitwise identical") {
    RunResult a = run_bridge(env, data, cfg, 1);
    RunResult b = run_bridge(env, data, cfg, 1);
    REQUIRE(a.records.size() == b.records.size());
    for (size_t i = 0; i < a.records.size(); ++i) {
      CHECK(a.records[i].pair_i == b.records[i].pair_i);
      CHECK(a.records[i].pair_j == b.records[i].pair_j);
      CHECK(a.records[i].outcome == b.records[i].outcome);
      CHECK(a.records[i].cum_regret == b.records[i].cum_regret);
      CHECK(a.records[i].bonus_1 == b.records[i].bonus_1);
    }
    CHECK(a.best_policy == b.best_policy);
  }
  SUBCASE("step records are well formed") {
    RunResult r = run_bridge(env, data, cfg, 1);
    REQUIRE(static_cast<int>(r.records.size()) == cfg.T);
    double cum = 0.0;
    for (int t = 0; t < cfg.T; ++t) {
      const StepRecord& rec = r.records[t];
      CHECK(rec.t == t + 1);
      CHECK(rec.pi_t_size >= 1);
      CHECK(rec.pi_t_size <= r.n_candidates);
      CHECK((rec.outcome == 0 || rec.outcome == 1));
      cum += rec.inst_regret;
      CHECK(rec.cum_regret == doctest::Approx(cum).epsilon(1e-9));
    }
  }
  SUBCASE("baseline differs in its candidate pool") {
    RunResult r = run_baseline_pbrl(env, data, cfg, 1);
    CHECK(r.n_candidates == 1024);  // full enumeration, no offline pruning
    REQUIRE(static_cast<int>(r.records.size()) == cfg.T);
  }
  SUBCASE("bridge pool is never larger than the baseline pool") {
    RunResult rb = run_bridge(env, data, cfg, 1);
    RunResult rp = run_baseline_pbrl(env, data, cfg, 1);
    CHECK(rb.n_candidates <= rp.n_candidates);
  }
}

TEST_CASE("evaluate_regret and pseudo_regret") {
  TabularMDP env = build_star_mdp();
  DeterministicPolicy best = optimal_policy(env);
  CHECK(evaluate_regret(env, best, best) == doctest::Approx(0.0));
  DeterministicPolicy bad(5, 1);
  CHECK(evaluate_regret(env, bad, best) > 0.0);
  Embedding emb = make_embedding(EmbeddingKind::kIdentityShort, 5, 4, 8);
  Rng rng = seed_stream(44, 0, "wstar");
  Eigen::VectorXd w_star = fit_w_star(env, emb, 2000, rng);
  CHECK(pseudo_regret(env, emb, w_star, best, best, best) == doctest::Approx(0.0));
  // symmetric in the queried pair
  DeterministicPolicy other = {1, 1, 0, 2, 3};
  CHECK(pseudo_regret(env, emb, w_star, best, best, other) ==
        doctest::Approx(pseudo_regret(env, emb, w_star, best, other, best)));
}
