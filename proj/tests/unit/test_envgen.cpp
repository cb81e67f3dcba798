#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <map>

#include "horizon/consolidate.hpp"
#include "horizon/dp.hpp"
#include "horizon/enumerate.hpp"
#include "horizon/envgen.hpp"
#include "horizon/gridworld.hpp"
#include "horizon/bounds.hpp"
#include "oracles.hpp"

using namespace horizon;

namespace {

const Policy& uniform2() {
  static const Policy p = Policy::uniform(2);
  return p;
}

TabularMdp empty_5x5(std::size_t horizon) {
  const GridSimulator sim = make_empty_grid(5, horizon);
  EnumerationConfig config;
  config.horizon = horizon;
  const auto raw = enumerate(sim, config);
  return consolidate(raw.mdp, observation_keys(sim, raw)).mdp;
}

}  // namespace

TEST(NeedleChain, ThreeStepTargetZeros) {
  const TabularMdp mdp = make_needle_chain(3, 2, {0, 0, 0});
  EXPECT_DOUBLE_EQ(oracle::brute_optimal_return(mdp), 1.0);
  const QTable q = policy_q(mdp, uniform2());
  const double v0 = 0.5 * (q(0, mdp.start_state(), 0) + q(0, mdp.start_state(), 1));
  EXPECT_DOUBLE_EQ(v0, 1.0 / 8.0);
  EXPECT_DOUBLE_EQ(optimal_return(mdp), 1.0);
}

TEST(NeedleChain, SingleDecision) {
  const TabularMdp mdp = make_needle_chain(1, 2, {1});
  EXPECT_DOUBLE_EQ(optimal_return(mdp), 1.0);
  EXPECT_DOUBLE_EQ(mdp.reward(mdp.start_state(), 0), 0.0);
}

TEST(NeedleChain, IsOneQviSolvable) {
  for (std::size_t t : {2, 5, 8}) EXPECT_EQ(min_k_qvi(make_needle_chain(t, 2), uniform2()), 1u);
}

TEST(NeedleChain, OnlyTheTargetPays) {
  const TabularMdp mdp = make_needle_chain(6, 3, {2, 0, 1, 1, 0, 2});
  std::size_t winners = 0;
  oracle::for_each_trajectory(mdp, [&](const auto& seq, double r) {
    if (r == 1.0) {
      ++winners;
      EXPECT_EQ(seq, (std::vector<ActionIndex>{2, 0, 1, 1, 0, 2}));
    } else {
      EXPECT_EQ(r, 0.0);
    }
  });
  EXPECT_EQ(winners, 1u);
}

TEST(NeedleChain, TreeFormExceedingCapIsRejected) {
  GeneratorOptions tree{ChainForm::tree, 1000};
  EXPECT_THROW(make_needle_chain(12, 2, tree), CapExceeded);
  EXPECT_NO_THROW(make_needle_chain(8, 2, tree));
}

TEST(DenseChain, OptimalReturnAndEpw) {
  EXPECT_DOUBLE_EQ(optimal_return(make_dense_chain(5, 2)), 5.0);
  EXPECT_EQ(epw(make_dense_chain(7, 3)), 1u);
}

TEST(DenseChain, RandomQAtStartForTwoSteps) {
  const TabularMdp mdp = make_dense_chain(2, 2);
  const QTable q = policy_q(mdp, uniform2());
  EXPECT_DOUBLE_EQ(q(0, mdp.start_state(), 1), 1.5);
  EXPECT_DOUBLE_EQ(oracle::brute_uniform_q0(mdp, 1), 1.5);
}

TEST(DelayedChain, EpwAndOptimalReturn) {
  for (std::size_t t : {3, 6, 9}) {
    const TabularMdp mdp = make_delayed_chain(t, 2);
    EXPECT_EQ(epw(mdp), t);
    EXPECT_DOUBLE_EQ(optimal_return(mdp), static_cast<double>(t));
  }
}

TEST(DelayedChain, StartQMatchesDenseChain) {
  const TabularMdp delayed = make_delayed_chain(3, 2);
  const TabularMdp dense = make_dense_chain(3, 2);
  const QTable qd = policy_q(delayed, uniform2());
  const QTable qe = policy_q(dense, uniform2());
  for (ActionIndex a = 0; a < 2; ++a) {
    EXPECT_DOUBLE_EQ(qd(0, delayed.start_state(), a), qe(0, dense.start_state(), a));
    EXPECT_DOUBLE_EQ(oracle::brute_uniform_q0(delayed, a), oracle::brute_uniform_q0(dense, a));
  }
}

TEST(DelayedChain, TrajectoryReturnsMatchDenseChain) {
  const TabularMdp delayed = make_delayed_chain(5, 3);
  const TabularMdp dense = make_dense_chain(5, 3);
  std::vector<double> a, b;
  oracle::for_each_trajectory(delayed, [&](const auto&, double r) { a.push_back(r); });
  oracle::for_each_trajectory(dense, [&](const auto&, double r) { b.push_back(r); });
  EXPECT_EQ(a, b);
}

TEST(Adversarial, NeedsFullLookahead) {
  const TabularMdp mdp = make_adversarial_kT(4, 2);
  EXPECT_EQ(min_k_qvi(mdp, uniform2()), 4u);
  EXPECT_DOUBLE_EQ(optimal_return(mdp), 1.0);
  const QTable q1 = policy_q(mdp, uniform2());
  const ActionIndex greedy = q1.argmax(0, mdp.start_state()).front();
  EXPECT_EQ(greedy, 0u);
  EXPECT_DOUBLE_EQ(mdp.reward(mdp.start_state(), greedy), 0.75);
  EXPECT_DOUBLE_EQ(sequence_return(mdp, {0, 0, 0, 0}), 0.75);
}

TEST(Adversarial, IterateValuesOnNeedlePath) {
  const std::size_t T = 5;
  const std::size_t A = 2;
  const TabularMdp mdp = make_adversarial_kT(T, A);
  const auto iterates = qvi_iterates(mdp, Policy::uniform(A), T - 1, reachable_sets(mdp));
  for (std::size_t i = 1; i < T; ++i) {
    EXPECT_DOUBLE_EQ(iterates[i - 1](0, mdp.start_state(), A - 1), std::pow(A, -double(T - i)));
  }
}

TEST(Periodic, OptimalReturnCountsRewardSlots) {
  for (auto [t, h] : {std::pair{8, 2}, {12, 3}, {9, 4}, {7, 7}}) {
    const TabularMdp mdp = make_lowerbound_periodic(t, 2, h, 3);
    EXPECT_DOUBLE_EQ(optimal_return(mdp), std::floor(double(t) / h));
    EXPECT_DOUBLE_EQ(oracle::brute_optimal_return(mdp), std::floor(double(t) / h));
  }
}

TEST(Periodic, FullPeriodIsANeedle) {
  const TabularMdp mdp = make_lowerbound_periodic(6, 2, 6, 5);
  EXPECT_EQ(oracle::brute_optimal_sequences(mdp).size(), 1u);
  EXPECT_EQ(epw(mdp), 6u);
  EXPECT_DOUBLE_EQ(optimal_return(mdp), 1.0);
}

TEST(Distractor, SolvableWithOneStep) {
  const TabularMdp mdp = make_distractor(6, 2);
  EXPECT_EQ(min_k_qvi(mdp, uniform2()), 1u);
  EXPECT_EQ(epw(mdp), 1u);
  EXPECT_DOUBLE_EQ(optimal_return(mdp), 6.0);
  EXPECT_DOUBLE_EQ(sequence_return(mdp, std::vector<ActionIndex>(6, 1)), 5.0);
}

TEST(Distractor, RandomQAtStartForTwoSteps) {
  const TabularMdp mdp = make_distractor(2, 2);
  const QTable q = policy_q(mdp, uniform2());
  for (ActionIndex a = 0; a < 2; ++a) {
    EXPECT_DOUBLE_EQ(q(0, mdp.start_state(), a), oracle::brute_uniform_q0(mdp, a));
  }
  EXPECT_DOUBLE_EQ(q(0, mdp.start_state(), 0), 1.5);
  EXPECT_DOUBLE_EQ(q(0, mdp.start_state(), 1), 0.5);
}

TEST(Generators, OutputsValidate) {
  for (std::size_t t = 1; t <= 6; ++t) {
    for (std::size_t a = 2; a <= 3; ++a) {
      EXPECT_TRUE(validate(make_needle_chain(t, a)).empty());
      EXPECT_TRUE(validate(make_dense_chain(t, a)).empty());
      EXPECT_TRUE(validate(make_delayed_chain(t, a)).empty());
      EXPECT_TRUE(validate(make_lowerbound_periodic(t, a, 1 + t / 2)).empty());
      if (t >= 2) {
        EXPECT_TRUE(validate(make_adversarial_kT(t, a)).empty());
        EXPECT_TRUE(validate(make_distractor(t, a)).empty());
      }
      EXPECT_TRUE(validate(make_random_tree(t, a, 7 * t + a)).empty());
      EXPECT_TRUE(validate(make_random_layered(t, a, 3, t + a)).empty());
    }
  }
}

TEST(Generators, ConsolidatedChainsStaySmall) {
  for (std::size_t t = 2; t <= 10; ++t) {
    for (std::size_t a = 2; a <= 3; ++a) {
      const std::size_t cap = 2 * t * a + 2;
      EXPECT_LE(consolidate(make_needle_chain(t, a)).mdp.num_states(), cap);
      EXPECT_LE(consolidate(make_dense_chain(t, a)).mdp.num_states(), cap);
      EXPECT_LE(consolidate(make_adversarial_kT(t, a)).mdp.num_states(), cap);
      EXPECT_LE(consolidate(make_lowerbound_periodic(t, a, 2)).mdp.num_states(), cap);
      EXPECT_LE(consolidate(make_distractor(t, a)).mdp.num_states(), cap);
      // Delayed payment needs a countdown per exit step, so its size is quadratic in T.
      EXPECT_EQ(consolidate(make_delayed_chain(t, a)).mdp.num_states(),
                t + (t - 1) * (t - 2) / 2 + 1);
    }
  }
}

TEST(Generators, TreeFormMatchesConsolidatedForm) {
  GeneratorOptions tree{ChainForm::tree, 100000};
  for (const auto& [compact, unrolled] :
       {std::pair{make_needle_chain(5, 2), make_needle_chain(5, 2, tree)},
        {make_dense_chain(4, 3), make_dense_chain(4, 3, tree)},
        {make_delayed_chain(5, 2), make_delayed_chain(5, 2, tree)}}) {
    EXPECT_GT(unrolled.num_states(), compact.num_states());
    EXPECT_DOUBLE_EQ(optimal_return(compact), optimal_return(unrolled));
    const QTable qc = policy_q(compact, Policy::uniform(compact.num_actions()));
    const QTable qu = policy_q(unrolled, Policy::uniform(unrolled.num_actions()));
    for (ActionIndex a = 0; a < compact.num_actions(); ++a) {
      EXPECT_NEAR(qc(0, compact.start_state(), a), qu(0, unrolled.start_state(), a), 1e-12);
    }
  }
}

TEST(EmptyGrid, ShortestSolutionByBfs) {
  const GridSimulator sim = make_empty_grid(5, 100);
  std::map<Blob, int> dist{{sim.initial_state(), 0}};
  std::deque<Blob> queue{sim.initial_state()};
  int shortest = -1;
  while (!queue.empty() && shortest < 0) {
    const Blob cur = queue.front();
    queue.pop_front();
    for (ActionIndex a = 0; a < 3; ++a) {
      const StepResult r = sim.step(cur, a);
      if (r.reward == 1.0) {
        shortest = dist[cur] + 1;
        break;
      }
      if (dist.emplace(r.next, dist[cur] + 1).second) queue.push_back(r.next);
    }
  }
  EXPECT_EQ(shortest, 5);
  EXPECT_DOUBLE_EQ(optimal_return(empty_5x5(5)), 1.0);
  EXPECT_DOUBLE_EQ(optimal_return(empty_5x5(4)), 0.0);
}

TEST(EmptyGrid, EveryInteriorPoseIsReachable) {
  const GridSimulator sim = make_empty_grid(5, 100);
  EnumerationConfig config;
  config.horizon = 100;
  const auto raw = enumerate(sim, config);
  std::set<Blob> blobs(raw.blobs.begin(), raw.blobs.end());
  std::size_t poses = 0;
  for (int x = 1; x <= 3; ++x) {
    for (int y = 1; y <= 3; ++y) {
      if (x == 3 && y == 3) continue;
      for (int d = 0; d < 4; ++d) {
        poses += blobs.count(Blob{static_cast<char>(x), static_cast<char>(y), static_cast<char>(d)});
      }
    }
  }
  EXPECT_EQ(poses, 32u);
  const TabularMdp mdp = empty_5x5(100);
  EXPECT_TRUE(check_goal_mdp(mdp).ok);
  EXPECT_EQ(min_k_qvi(mdp, Policy::uniform(3)), 1u);
}

TEST(EmptyGrid, WallBumpIsANoOp) {
  const GridSimulator sim = make_empty_grid(5, 10);
  const Blob facing_wall = sim.step(sim.step(sim.initial_state(), 0).next, 0).next;  // facing -x
  const StepResult r = sim.step(facing_wall, GridSimulator::kForward);
  EXPECT_EQ(r.next, facing_wall);
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_FALSE(r.terminal);
}
