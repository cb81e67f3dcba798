#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "horizon/mdp.hpp"

namespace oracle {

using horizon::ActionIndex;
using horizon::StateIndex;
using horizon::TabularMdp;

/// Calls fn(actions, return) for every open-loop action sequence of length
/// T from the start state.
inline void for_each_trajectory(const TabularMdp& mdp,
                                const std::function<void(const std::vector<ActionIndex>&, double)>& fn) {
  std::vector<ActionIndex> seq(mdp.horizon(), 0);
  for (;;) {
    StateIndex s = mdp.start_state();
    double total = 0.0;
    double w = 1.0;
    for (ActionIndex a : seq) {
      total += w * mdp.reward(s, a);
      w *= mdp.discount();
      s = mdp.next(s, a);
    }
    fn(seq, total);
    std::size_t i = seq.size();
    while (i > 0 && seq[i - 1] + 1 == mdp.num_actions()) seq[--i] = 0;
    if (i == 0) return;
    ++seq[i - 1];
  }
}

inline double brute_optimal_return(const TabularMdp& mdp) {
  double best = -INFINITY;
  for_each_trajectory(mdp, [&](const auto&, double r) { best = std::max(best, r); });
  return best;
}

/// Expected return under the uniform policy after forcing `first` at the start.
inline double brute_uniform_q0(const TabularMdp& mdp, ActionIndex first) {
  double sum = 0.0;
  double count = 0.0;
  for_each_trajectory(mdp, [&](const auto& seq, double r) {
    if (seq.empty() || seq[0] != first) return;
    sum += r;
    count += 1.0;
  });
  return sum / count;
}

/// Optimal action sequences, as a set of index-encoded sequences.
inline std::vector<std::vector<ActionIndex>> brute_optimal_sequences(const TabularMdp& mdp,
                                                                     double tol = 1e-9) {
  const double best = brute_optimal_return(mdp);
  std::vector<std::vector<ActionIndex>> out;
  for_each_trajectory(mdp, [&](const auto& seq, double r) {
    if (std::abs(r - best) <= tol) out.push_back(seq);
  });
  return out;
}

}  // namespace oracle
