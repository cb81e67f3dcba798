#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "horizon/consolidate.hpp"
#include "horizon/dp.hpp"
#include "horizon/enumerate.hpp"
#include "horizon/envgen.hpp"
#include "horizon/gridworld.hpp"

using namespace horizon;

namespace {

/// Distinct non-terminal blobs reachable in fewer than `horizon` steps, by
/// depth-first search with per-depth revisiting.
template <class Sim>
std::set<Blob> dfs_blobs(const Sim& sim, std::size_t horizon) {
  std::set<Blob> seen;
  std::map<Blob, std::size_t> best_depth;
  std::function<void(const Blob&, std::size_t)> visit = [&](const Blob& b, std::size_t d) {
    auto it = best_depth.find(b);
    if (it != best_depth.end() && it->second <= d) return;
    best_depth[b] = d;
    seen.insert(b);
    if (d >= horizon) return;
    for (ActionIndex a = 0; a < sim.num_actions(); ++a) {
      const StepResult r = sim.step(b, a);
      if (!r.terminal) visit(r.next, d + 1);
    }
  };
  visit(sim.initial_state(), 0);
  return seen;
}

// Step results flip between calls for one particular pair.
struct FlakySimulator {
  mutable int calls = 0;
  std::size_t num_actions() const { return 2; }
  Blob initial_state() const { return "s"; }
  StepResult step(const Blob& b, ActionIndex a) const {
    if (b == "s" && a == 0) return {"x", static_cast<double>(calls++ % 2), false};
    return {b, 0.0, false};
  }
  Blob observation_key(const Blob& b) const { return b; }
};

/// Coarsest bisimulation by brute-force fixpoint over all pairs.
std::vector<std::vector<bool>> bisimilar(const TabularMdp& mdp) {
  const std::size_t n = mdp.num_states();
  std::vector<std::vector<bool>> same(n, std::vector<bool>(n, true));
  bool changed = true;
  while (changed) {
    changed = false;
    for (StateIndex x = 0; x < n; ++x) {
      for (StateIndex y = 0; y < n; ++y) {
        if (!same[x][y]) continue;
        bool ok = true;
        for (ActionIndex a = 0; a < mdp.num_actions() && ok; ++a) {
          ok = mdp.reward(x, a) == mdp.reward(y, a) && same[mdp.next(x, a)][mdp.next(y, a)];
        }
        if (!ok) {
          same[x][y] = false;
          changed = true;
        }
      }
    }
  }
  return same;
}

}  // namespace

TEST(Enumerate, EmptyGridMatchesDfsOracle) {
  const GridSimulator sim = make_empty_grid(5, 100);
  EnumerationConfig config;
  config.horizon = 100;
  const auto result = enumerate(sim, config);
  const auto oracle = dfs_blobs(sim, 100);
  ASSERT_TRUE(result.sink.has_value());
  EXPECT_EQ(result.mdp.num_states(), oracle.size() + 1);
  for (StateIndex s = 0; s < result.blobs.size(); ++s) {
    if (s == *result.sink) continue;
    EXPECT_EQ(oracle.count(result.blobs[s]), 1u);
  }
  EXPECT_TRUE(validate(result.mdp).empty());
}

TEST(Enumerate, TransitionsAgreeWithSimulator) {
  const GridSimulator sim = make_empty_grid(6, 30);
  EnumerationConfig config;
  config.horizon = 30;
  const auto result = enumerate(sim, config);
  for (StateIndex s = 0; s < result.mdp.num_states(); ++s) {
    if (result.sink && s == *result.sink) continue;
    for (ActionIndex a = 0; a < 3; ++a) {
      const StepResult r = sim.step(result.blobs[s], a);
      EXPECT_EQ(result.mdp.reward(s, a), r.reward);
      if (r.terminal) {
        EXPECT_EQ(result.mdp.next(s, a), *result.sink);
      } else {
        EXPECT_EQ(result.blobs[result.mdp.next(s, a)], r.next);
      }
    }
  }
}

TEST(Enumerate, UnrolledNeedleTreeHasSevenDecisionStates) {
  const TabularMdp needle = make_needle_chain(3, 2);
  const UnrolledSimulator sim(needle);
  EnumerationConfig config;
  config.horizon = 3;
  const auto result = enumerate(sim, config);
  ASSERT_TRUE(result.sink.has_value());
  EXPECT_EQ(result.mdp.num_states(), 7u + 1u);
  EXPECT_DOUBLE_EQ(optimal_return(result.mdp), 1.0);
}

TEST(Enumerate, ZeroHorizonKeepsOnlyTheStart) {
  const GridSimulator sim = make_empty_grid(5, 0);
  EnumerationConfig config;
  config.horizon = 0;
  const auto result = enumerate(sim, config);
  EXPECT_EQ(result.mdp.num_states(), 1u);
  EXPECT_EQ(result.mdp.next(0, 2), 0u);
}

TEST(Enumerate, CapExceededReportsFrontier) {
  const GridSimulator sim = make_empty_grid(8, 50);
  EnumerationConfig config;
  config.horizon = 50;
  config.max_states = 10;
  try {
    enumerate(sim, config);
    FAIL() << "expected CapExceeded";
  } catch (const CapExceeded& e) {
    EXPECT_GT(e.observed(), 0u);
  }
}

TEST(Enumerate, WorkerCountDoesNotChangeResult) {
  const GridSimulator sim = make_empty_grid(7, 40);
  EnumerationConfig one;
  one.horizon = 40;
  EnumerationConfig four = one;
  four.worker_count = 4;
  const auto a = enumerate(sim, one);
  const auto b = enumerate(sim, four);
  EXPECT_EQ(a.mdp, b.mdp);
  EXPECT_EQ(a.blobs, b.blobs);
}

TEST(Enumerate, NondeterminismIsDetected) {
  FlakySimulator sim;
  EnumerationConfig config;
  config.horizon = 3;
  config.replay_fraction = 1.0;
  EXPECT_THROW(enumerate(sim, config), NondeterminismError);
}

TEST(Consolidate, NeedleTreeMatchesBisimulationOracle) {
  GeneratorOptions tree{ChainForm::tree, 1000};
  const TabularMdp mdp = make_needle_chain(3, 2, tree);
  const ConsolidationResult c = consolidate(mdp);
  const auto same = bisimilar(mdp);
  for (StateIndex x = 0; x < mdp.num_states(); ++x) {
    for (StateIndex y = 0; y < mdp.num_states(); ++y) {
      EXPECT_EQ(c.mapping[x] == c.mapping[y], static_cast<bool>(same[x][y])) << x << " " << y;
    }
  }
  // Three on-path decision states, the final rewarded step, one dead class and the sink.
  std::set<StateIndex> classes(c.mapping.begin(), c.mapping.end());
  EXPECT_EQ(classes.size(), c.mdp.num_states());
  EXPECT_DOUBLE_EQ(optimal_return(c.mdp), 1.0);
}

TEST(Consolidate, RandomTreesMatchBisimulationOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TabularMdp mdp = make_random_tree(4, 2, seed);
    const ConsolidationResult c = consolidate(mdp);
    const auto same = bisimilar(mdp);
    for (StateIndex x = 0; x < mdp.num_states(); ++x) {
      for (StateIndex y = 0; y < mdp.num_states(); ++y) {
        ASSERT_EQ(c.mapping[x] == c.mapping[y], static_cast<bool>(same[x][y]));
      }
    }
  }
}

TEST(Consolidate, MinimalMdpIsIdentity) {
  const TabularMdp mdp(3, 2, 4, 0, {1, 2, 2, 2, 2, 2}, {0.0, 1.0, 0.5, 0.0, 0.0, 0.0}, {0, 0, 1});
  const ConsolidationResult c = consolidate(mdp);
  EXPECT_EQ(c.mdp, mdp);
  EXPECT_EQ(c.mapping, (std::vector<StateIndex>{0, 1, 2}));
}

TEST(Consolidate, EquivalentStatesMerge) {
  // States 1 and 2 share rewards and successors.
  const TabularMdp mdp(4, 2, 3, 0, {1, 2, 3, 3, 3, 3, 3, 3}, {0, 0, 1, 0, 1, 0, 0, 0},
                       {0, 0, 0, 1});
  const ConsolidationResult c = consolidate(mdp);
  EXPECT_EQ(c.mdp.num_states(), 3u);
  EXPECT_EQ(c.mapping[1], c.mapping[2]);
}

TEST(Consolidate, ObservationKeysPreventMerging) {
  const TabularMdp mdp(4, 2, 3, 0, {1, 2, 3, 3, 3, 3, 3, 3}, {0, 0, 1, 0, 1, 0, 0, 0},
                       {0, 0, 0, 1});
  const ConsolidationResult c = consolidate(mdp, {"a", "b", "c", "d"});
  EXPECT_EQ(c.mdp.num_states(), 4u);
}

TEST(Consolidate, PreservesValuesOnGrid) {
  const GridSimulator sim = make_empty_grid(6, 40);
  EnumerationConfig config;
  config.horizon = 40;
  const auto raw = enumerate(sim, config);
  const ConsolidationResult c = consolidate(raw.mdp);
  EXPECT_LE(c.mdp.num_states(), raw.mdp.num_states());
  EXPECT_NEAR(optimal_return(c.mdp), optimal_return(raw.mdp), 1e-10);
  const QTable qa = policy_q(raw.mdp, Policy::uniform(3));
  const QTable qb = policy_q(c.mdp, Policy::uniform(3));
  for (ActionIndex a = 0; a < 3; ++a) {
    EXPECT_NEAR(qa(0, raw.mdp.start_state(), a), qb(0, c.mdp.start_state(), a), 1e-10);
  }
}
