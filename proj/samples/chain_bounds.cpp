// Prints the closed-form bounds for the sparse, dense and delayed chains.
#include <cstdio>

#include "horizon/horizon.hpp"

int main() {
  using namespace horizon;
  const std::size_t horizon = 20;
  const Policy uniform = Policy::uniform(2);
  const struct {
    const char* name;
    TabularMdp mdp;
  } chains[] = {{"needle", make_needle_chain(horizon, 2)},
                {"dense", make_dense_chain(horizon, 2)},
                {"delayed", make_delayed_chain(horizon, 2)}};
  std::printf("%-8s %4s %4s %8s %10s %14s\n", "chain", "S", "W", "H_1", "log10 N", "log10 worst");
  for (const auto& c : chains) {
    const Theorem4Result h = theorem4_bound(c.mdp, uniform, 1);
    std::printf("%-8s %4zu %4zu %8.3f %10.3f %14.3f\n", c.name, c.mdp.num_states(), epw(c.mdp),
                h.effective, h.timesteps.log10_value,
                worst_case_bound(2, horizon).log10_value);
  }
}
