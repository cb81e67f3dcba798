// Enumerates the 5x5 empty gridworld, consolidates it and compares the
// goal-MDP bound with the tight effective horizon for k = 1.
#include <cstdio>

#include "horizon/horizon.hpp"

int main() {
  using namespace horizon;
  const GridSimulator sim = make_empty_grid(5, 100);
  EnumerationConfig config;
  config.horizon = 100;
  const EnumerationResult raw = enumerate(sim, config);
  const ConsolidationResult quotient = consolidate(raw.mdp, observation_keys(sim, raw));
  const TabularMdp& mdp = quotient.mdp;
  std::printf("states: %zu enumerated, %zu after consolidation\n", raw.mdp.num_states(),
              mdp.num_states());

  const Policy uniform = Policy::uniform(mdp.num_actions());
  const GoalBound goal = goal_mdp_bound(mdp, uniform);
  std::printf("goal bound: p = %.6g, H <= %.3f\n", goal.p, goal.effective);

  const TightResult tight = tight_effective_horizon(mdp, uniform, {1});
  std::printf("tight bound (k = 1): m* = %.0f, H = %.3f\n", std::pow(10.0, tight.log10_m),
              tight.effective);
}
