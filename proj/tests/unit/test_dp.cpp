#include <gtest/gtest.h>

#include <cmath>

#include "horizon/dp.hpp"
#include "horizon/envgen.hpp"
#include "oracles.hpp"

using namespace horizon;

namespace {

std::vector<TabularMdp> small_random_mdps() {
  std::vector<TabularMdp> out;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    out.push_back(make_random_layered(5, 3, 4, seed));
    out.push_back(make_random_tree(4, 2, seed));
  }
  return out;
}

}  // namespace

TEST(PolicyQ, UniformMatchesTrajectoryAverage) {
  for (const auto& mdp : small_random_mdps()) {
    const QTable q = policy_q(mdp, Policy::uniform(mdp.num_actions()));
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      EXPECT_NEAR(q(0, mdp.start_state(), a), oracle::brute_uniform_q0(mdp, a), 1e-9);
    }
  }
}

TEST(PolicyQ, DeterministicPolicyFollowsItsSequence) {
  const TabularMdp mdp = make_dense_chain(6, 3);
  const Policy always_zero = Policy::deterministic(
      mdp.horizon(), mdp.num_states(), 3, std::vector<ActionIndex>(mdp.horizon() * mdp.num_states(), 0));
  const QTable q = policy_q(mdp, always_zero);
  const std::vector<ActionIndex> zeros(6, 0);
  EXPECT_DOUBLE_EQ(q(0, mdp.start_state(), 0), sequence_return(mdp, zeros));
}

TEST(PolicyQ, RejectsPolicyThatDoesNotCover) {
  const TabularMdp mdp = make_dense_chain(4, 2);
  const Policy narrow = Policy::deterministic(2, 1, 2, {0, 0});
  EXPECT_THROW(policy_q(mdp, narrow), PreconditionError);
}

TEST(OptimalQ, MatchesBruteForce) {
  for (const auto& mdp : small_random_mdps()) {
    EXPECT_NEAR(optimal_return(mdp), oracle::brute_optimal_return(mdp), 1e-9);
  }
}

TEST(OptimalQ, ZeroHorizonHasZeroReturn) {
  const TabularMdp mdp = make_dense_chain(3, 2).with_horizon(0);
  EXPECT_EQ(optimal_return(mdp), 0.0);
  EXPECT_EQ(epw(mdp), 0u);
}

TEST(Qvi, HorizonMinusOneStepsReachOptimum) {
  for (const auto& mdp : small_random_mdps()) {
    const ReachableSets reach = reachable_sets(mdp);
    const QTable qstar = optimal_q(mdp, reach);
    const QTable qt = qk_table(mdp, Policy::uniform(mdp.num_actions()), mdp.horizon(), reach);
    for (std::size_t t = 0; t < mdp.horizon(); ++t) {
      for (StateIndex s : reach.states[t]) {
        for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
          EXPECT_NEAR(qt(t, s, a), qstar(t, s, a), 1e-9);
        }
      }
    }
  }
}

TEST(Qvi, IteratesAgreeWithRepeatedSteps) {
  const TabularMdp mdp = make_random_layered(6, 2, 3, 11);
  const ReachableSets reach = reachable_sets(mdp);
  const auto iterates = qvi_iterates(mdp, Policy::uniform(2), 4, reach);
  ASSERT_EQ(iterates.size(), 4u);
  for (std::size_t k = 1; k <= 4; ++k) {
    const auto& a = iterates[k - 1].values();
    const QTable direct = qk_table(mdp, Policy::uniform(2), k, reach);
    const auto& b = direct.values();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::isnan(a[i])) {
        EXPECT_TRUE(std::isnan(b[i]));
      } else {
        EXPECT_EQ(a[i], b[i]);
      }
    }
  }
}

TEST(OptimalStates, NeedleFollowsTheTarget) {
  const TabularMdp mdp = make_needle_chain(5, 3);
  const auto sets = optimal_state_sets(mdp);
  ASSERT_EQ(sets.size(), 5u);
  for (const auto& layer : sets) EXPECT_EQ(layer.size(), 1u);
}

TEST(OptimalStates, EveryOptimalSequenceStaysInside) {
  for (const auto& mdp : small_random_mdps()) {
    const auto sets = optimal_state_sets(mdp);
    for (const auto& seq : oracle::brute_optimal_sequences(mdp)) {
      StateIndex s = mdp.start_state();
      for (std::size_t t = 0; t < seq.size(); ++t) {
        EXPECT_TRUE(std::binary_search(sets[t].begin(), sets[t].end(), s));
        s = mdp.next(s, seq[t]);
      }
    }
  }
}

TEST(MinK, ChainFamilies) {
  const Policy u2 = Policy::uniform(2);
  EXPECT_EQ(min_k_qvi(make_needle_chain(8, 2), u2), 1u);
  EXPECT_EQ(min_k_qvi(make_dense_chain(10, 2), u2), 1u);
  EXPECT_EQ(min_k_qvi(make_delayed_chain(10, 2), u2), 1u);
  EXPECT_EQ(min_k_qvi(make_adversarial_kT(4, 2), u2), 4u);
  EXPECT_EQ(min_k_qvi(make_adversarial_kT(4, 2), u2, 3), std::nullopt);
}

TEST(MinK, SolvabilityStaysOnceReachedOnChains) {
  const std::vector<TabularMdp> chains{make_needle_chain(6, 2), make_dense_chain(6, 3),
                                       make_delayed_chain(6, 2), make_adversarial_kT(5, 2),
                                       make_lowerbound_periodic(9, 2, 3), make_distractor(6, 2)};
  for (const auto& mdp : chains) {
    const ReachableSets reach = reachable_sets(mdp);
    const QTable qstar = optimal_q(mdp, reach);
    const auto iterates = qvi_iterates(mdp, Policy::uniform(mdp.num_actions()), mdp.horizon(), reach);
    bool solved = false;
    for (const auto& q : iterates) {
      const bool now = greedy_policies_optimal(mdp, q, qstar);
      if (solved) EXPECT_TRUE(now);
      solved = solved || now;
    }
    EXPECT_TRUE(solved);
  }
}

TEST(MinK, SolvabilityIsNotMonotoneInGeneral) {
  // Greedy on Q^1 picks the optimal first action; one backup makes both
  // first actions tie at 0.5, so a suboptimal greedy policy appears.
  const TabularMdp mdp = make_random_tree(4, 2, 3);
  const ReachableSets reach = reachable_sets(mdp);
  const QTable qstar = optimal_q(mdp, reach);
  const auto iterates = qvi_iterates(mdp, Policy::uniform(2), 4, reach);
  EXPECT_TRUE(greedy_policies_optimal(mdp, iterates[0], qstar));
  EXPECT_FALSE(greedy_policies_optimal(mdp, iterates[1], qstar));
  EXPECT_TRUE(greedy_policies_optimal(mdp, iterates[3], qstar));
}

TEST(Epw, ChainFamilies) {
  EXPECT_EQ(epw(make_dense_chain(50, 2)), 1u);
  EXPECT_EQ(epw(make_needle_chain(7, 2)), 7u);
  EXPECT_EQ(epw(make_delayed_chain(9, 2)), 9u);
}

TEST(Gaps, DenseChainGapsAreFromTheUniformTail) {
  const TabularMdp mdp = make_dense_chain(4, 2);
  const ReachableSets reach = reachable_sets(mdp);
  const QTable q = policy_q(mdp, Policy::uniform(2), reach);
  const GapTable g = gaps(mdp, q, reach);
  // On-path at t: 1 + expected uniform tail of length T-t-1; off-path pays 0.
  for (std::size_t t = 0; t < 4; ++t) {
    double tail = 0.0;
    for (std::size_t i = 1; i < 4 - t; ++i) tail += std::pow(0.5, static_cast<double>(i));
    bool checked = false;
    for (StateIndex s : reach.states[t]) {
      if (g.ties(t, s)) continue;
      EXPECT_NEAR(g.at(t, s), 1.0 + tail, 1e-12);
      checked = true;
    }
    EXPECT_TRUE(checked);
  }
}

TEST(Gaps, TiedRowsAreFlagged) {
  const TabularMdp mdp = make_needle_chain(3, 2);
  const QTable q = policy_q(mdp, Policy::uniform(2));
  const GapTable g = gaps(mdp, q);
  const auto reach = reachable_sets(mdp);
  std::size_t tied = 0;
  for (StateIndex s : reach.states[2]) tied += g.ties(2, s) ? 1 : 0;
  EXPECT_GE(tied, 1u);
}

TEST(Occupancy, MassIsConservedAndMatchesCounts) {
  for (const auto& mdp : small_random_mdps()) {
    const OccupancyTable occ = occupancy(mdp, Policy::uniform(mdp.num_actions()));
    for (std::size_t t = 0; t < mdp.horizon(); ++t) EXPECT_NEAR(occ.total(t), 1.0, 1e-12);
  }
  const TabularMdp needle = make_needle_chain(4, 2);
  const OccupancyTable occ = occupancy(needle, Policy::uniform(2));
  EXPECT_NEAR(occ.at(0, needle.start_state(), 1), 0.5, 1e-15);
  const auto sets = optimal_state_sets(needle);
  EXPECT_NEAR(occ.at(3, sets[3][0], 1), 1.0 / 16.0, 1e-15);
}
