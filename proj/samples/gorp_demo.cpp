// Runs GORP on the dense chain at several rollout counts and reports the
// empirical success rate next to the smallest m found by search.
#include <cstdio>
#include <vector>

#include "horizon/horizon.hpp"

int main() {
  using namespace horizon;
  const TabularMdp mdp = make_dense_chain(10, 2);
  const Policy uniform = Policy::uniform(2);
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 101; ++i) seeds.push_back(run_seed(7, i));

  for (std::size_t m : {1, 2, 4, 8}) {
    std::size_t wins = 0;
    for (auto seed : seeds) wins += gorp_run(mdp, uniform, 1, m, seed).success ? 1 : 0;
    std::printf("m = %zu: %zu / %zu seeds optimal, %llu timesteps per run\n", m, wins, seeds.size(),
                static_cast<unsigned long long>(gorp_run(mdp, uniform, 1, m, 0).timesteps));
  }
  const EmpiricalMinM found = empirical_min_m(mdp, uniform, 1, seeds);
  std::printf("smallest m with half the seeds optimal: %zu (empirical H = %.3f)\n", found.m,
              found.effective);
}
