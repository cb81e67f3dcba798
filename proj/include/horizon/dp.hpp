#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "horizon/errors.hpp"
#include "horizon/mdp.hpp"
#include "horizon/policy.hpp"
#include "horizon/qtable.hpp"

namespace horizon {

/// States at which some action is taken at timestep t, for t in [0, T).
struct ReachableSets {
  std::vector<std::vector<StateIndex>> states;
  std::vector<std::vector<std::uint8_t>> member;

  bool contains(std::size_t t, StateIndex s) const { return member[t][s] != 0; }
};

inline ReachableSets reachable_sets(const TabularMdp& mdp) {
  const std::size_t horizon = mdp.horizon();
  ReachableSets out;
  out.states.resize(horizon);
  out.member.assign(horizon, std::vector<std::uint8_t>(mdp.num_states(), 0));
  if (horizon == 0) return out;
  out.states[0].push_back(mdp.start_state());
  out.member[0][mdp.start_state()] = 1;
  for (std::size_t t = 0; t + 1 < horizon; ++t) {
    for (StateIndex s : out.states[t]) {
      for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
        const StateIndex nxt = mdp.next(s, a);
        if (!out.member[t + 1][nxt]) {
          out.member[t + 1][nxt] = 1;
          out.states[t + 1].push_back(nxt);
        }
      }
    }
    std::sort(out.states[t + 1].begin(), out.states[t + 1].end());
  }
  return out;
}

namespace detail {

template <class Continuation>
QTable backward_fill(const TabularMdp& mdp, const ReachableSets& reach, QLabel label,
                     Continuation&& continuation) {
  const std::size_t horizon = mdp.horizon();
  QTable q(horizon, mdp.num_states(), mdp.num_actions(), label);
  for (std::size_t t = horizon; t-- > 0;) {
    for (StateIndex s : reach.states[t]) {
      for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
        double v = mdp.reward(s, a);
        if (t + 1 < horizon) v += mdp.discount() * continuation(t + 1, mdp.next(s, a));
        q.at(t, s, a) = v;
      }
    }
  }
  return q;
}

}  // namespace detail

inline QTable policy_q(const TabularMdp& mdp, const Policy& policy,
                       const ReachableSets& reach) {
  if (!policy.covers(mdp)) {
    throw PreconditionError("policy does not define a row for every (t, s) of the MDP");
  }
  QTable q(mdp.horizon(), mdp.num_states(), mdp.num_actions(), QLabel::policy_q);
  const std::size_t horizon = mdp.horizon();
  for (std::size_t t = horizon; t-- > 0;) {
    for (StateIndex s : reach.states[t]) {
      for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
        double v = mdp.reward(s, a);
        if (t + 1 < horizon) {
          const StateIndex nxt = mdp.next(s, a);
          double cont = 0.0;
          for (ActionIndex b = 0; b < mdp.num_actions(); ++b) {
            const double p = policy.prob(t + 1, nxt, b);
            if (p > 0.0) cont += p * q(t + 1, nxt, b);
          }
          v += mdp.discount() * cont;
        }
        q.at(t, s, a) = v;
      }
    }
  }
  return q;
}

inline QTable policy_q(const TabularMdp& mdp, const Policy& policy) {
  return policy_q(mdp, policy, reachable_sets(mdp));
}

inline QTable qvi_step(const TabularMdp& mdp, const QTable& q, const ReachableSets& reach) {
  return detail::backward_fill(mdp, reach, QLabel::qvi_iterate,
                               [&](std::size_t t, StateIndex s) { return q.max_value(t, s); });
}

inline QTable qvi_step(const TabularMdp& mdp, const QTable& q) {
  return qvi_step(mdp, q, reachable_sets(mdp));
}

inline QTable optimal_q(const TabularMdp& mdp, const ReachableSets& reach) {
  QTable q(mdp.horizon(), mdp.num_states(), mdp.num_actions(), QLabel::optimal);
  const std::size_t horizon = mdp.horizon();
  for (std::size_t t = horizon; t-- > 0;) {
    for (StateIndex s : reach.states[t]) {
      for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
        double v = mdp.reward(s, a);
        if (t + 1 < horizon) v += mdp.discount() * q.max_value(t + 1, mdp.next(s, a));
        q.at(t, s, a) = v;
      }
    }
  }
  return q;
}

inline QTable optimal_q(const TabularMdp& mdp) { return optimal_q(mdp, reachable_sets(mdp)); }

/// Reward table broadcast over every reachable (t, s): the one-step lookahead.
inline QTable reward_q(const TabularMdp& mdp, const ReachableSets& reach) {
  QTable q(mdp.horizon(), mdp.num_states(), mdp.num_actions(), QLabel::qvi_iterate);
  for (std::size_t t = 0; t < mdp.horizon(); ++t) {
    for (StateIndex s : reach.states[t]) {
      for (ActionIndex a = 0; a < mdp.num_actions(); ++a) q.at(t, s, a) = mdp.reward(s, a);
    }
  }
  return q;
}

inline double optimal_return(const TabularMdp& mdp, const QTable& qstar) {
  if (mdp.horizon() == 0) return 0.0;
  return qstar.max_value(0, mdp.start_state());
}

inline double optimal_return(const TabularMdp& mdp) {
  return optimal_return(mdp, optimal_q(mdp));
}

/// States visited by some optimal policy, per timestep.
inline std::vector<std::vector<StateIndex>> optimal_state_sets(const TabularMdp& mdp,
                                                              const QTable& qstar) {
  std::vector<std::vector<StateIndex>> sets(mdp.horizon());
  if (mdp.horizon() == 0) return sets;
  sets[0].push_back(mdp.start_state());
  std::vector<std::uint8_t> seen(mdp.num_states(), 0);
  for (std::size_t t = 0; t + 1 < mdp.horizon(); ++t) {
    std::fill(seen.begin(), seen.end(), 0);
    for (StateIndex s : sets[t]) {
      for (ActionIndex a : qstar.argmax(t, s)) {
        const StateIndex nxt = mdp.next(s, a);
        if (!seen[nxt]) {
          seen[nxt] = 1;
          sets[t + 1].push_back(nxt);
        }
      }
    }
    std::sort(sets[t + 1].begin(), sets[t + 1].end());
  }
  return sets;
}

inline std::vector<std::vector<StateIndex>> optimal_state_sets(const TabularMdp& mdp) {
  return optimal_state_sets(mdp, optimal_q(mdp));
}

/// True when every policy acting greedily on q is optimal. Only states that
/// greedy play can reach are inspected.
inline bool greedy_policies_optimal(const TabularMdp& mdp, const QTable& q, const QTable& qstar) {
  if (mdp.horizon() == 0) return true;
  std::vector<StateIndex> layer{mdp.start_state()};
  std::vector<std::uint8_t> seen(mdp.num_states(), 0);
  for (std::size_t t = 0; t < mdp.horizon(); ++t) {
    std::vector<StateIndex> next_layer;
    std::fill(seen.begin(), seen.end(), 0);
    for (StateIndex s : layer) {
      for (ActionIndex a : q.argmax(t, s)) {
        if (!qstar.in_argmax(t, s, a)) return false;
        const StateIndex nxt = mdp.next(s, a);
        if (!seen[nxt]) {
          seen[nxt] = 1;
          next_layer.push_back(nxt);
        }
      }
    }
    layer.swap(next_layer);
  }
  return true;
}

namespace detail {

inline std::optional<std::size_t> smallest_solvable_k(const TabularMdp& mdp, QTable q,
                                                      const ReachableSets& reach,
                                                      std::size_t k_max) {
  const QTable qstar = optimal_q(mdp, reach);
  for (std::size_t k = 1; k <= k_max; ++k) {
    if (k > 1) q = qvi_step(mdp, q, reach);
    if (greedy_policies_optimal(mdp, q, qstar)) return k;
  }
  return std::nullopt;
}

}  // namespace detail

/// Q^1 = Q of the exploration policy, Q^{i+1} = QVI(Q^i).
inline std::vector<QTable> qvi_iterates(const TabularMdp& mdp, const Policy& expl, std::size_t k,
                                        const ReachableSets& reach) {
  std::vector<QTable> out;
  out.reserve(k);
  out.push_back(policy_q(mdp, expl, reach));
  out.back().set_label(QLabel::qvi_iterate);
  while (out.size() < k) out.push_back(qvi_step(mdp, out.back(), reach));
  return out;
}

inline QTable qk_table(const TabularMdp& mdp, const Policy& expl, std::size_t k,
                       const ReachableSets& reach) {
  QTable q = policy_q(mdp, expl, reach);
  q.set_label(QLabel::qvi_iterate);
  for (std::size_t i = 1; i < k; ++i) q = qvi_step(mdp, q, reach);
  return q;
}

/// Smallest k <= k_max such that the MDP is k-QVI-solvable; nullopt if none.
inline std::optional<std::size_t> min_k_qvi(const TabularMdp& mdp, const Policy& expl,
                                            std::optional<std::size_t> k_max = std::nullopt) {
  const ReachableSets reach = reachable_sets(mdp);
  return detail::smallest_solvable_k(mdp, policy_q(mdp, expl, reach), reach,
                                     k_max.value_or(mdp.horizon()));
}

/// Effective planning window: the same check starting from the reward table.
inline std::size_t epw(const TabularMdp& mdp) {
  if (mdp.horizon() == 0) return 0;
  const ReachableSets reach = reachable_sets(mdp);
  return detail::smallest_solvable_k(mdp, reward_q(mdp, reach), reach, mdp.horizon())
      .value_or(mdp.horizon());
}

struct GapTable {
  std::size_t horizon = 0;
  std::size_t num_states = 0;
  std::vector<double> gap;              // kUnset where unreachable or all actions tie
  std::vector<std::uint8_t> all_tie;    // 1 where every action is in the argmax

  double at(std::size_t t, StateIndex s) const { return gap[t * num_states + s]; }
  bool ties(std::size_t t, StateIndex s) const { return all_tie[t * num_states + s] != 0; }
};

inline double gap_of(const std::vector<double>& values, bool& all_tie) {
  const double best = *std::max_element(values.begin(), values.end());
  double second = -std::numeric_limits<double>::infinity();
  all_tie = true;
  for (double v : values) {
    if (!ties_with(v, best)) {
      all_tie = false;
      second = std::max(second, v);
    }
  }
  return all_tie ? kUnset : best - second;
}

inline GapTable gaps(const TabularMdp& mdp, const QTable& q, const ReachableSets& reach) {
  GapTable out;
  out.horizon = mdp.horizon();
  out.num_states = mdp.num_states();
  out.gap.assign(out.horizon * out.num_states, kUnset);
  out.all_tie.assign(out.horizon * out.num_states, 0);
  std::vector<double> row(mdp.num_actions());
  for (std::size_t t = 0; t < mdp.horizon(); ++t) {
    for (StateIndex s : reach.states[t]) {
      for (ActionIndex a = 0; a < mdp.num_actions(); ++a) row[a] = q(t, s, a);
      bool tie = false;
      out.gap[t * out.num_states + s] = gap_of(row, tie);
      out.all_tie[t * out.num_states + s] = tie ? 1 : 0;
    }
  }
  return out;
}

inline GapTable gaps(const TabularMdp& mdp, const QTable& q) {
  return gaps(mdp, q, reachable_sets(mdp));
}

struct OccupancyTable {
  std::size_t horizon = 0;
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> mass;

  double at(std::size_t t, StateIndex s, ActionIndex a) const {
    return mass[(t * num_states + s) * num_actions + a];
  }
  double total(std::size_t t) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < num_states * num_actions; ++i) {
      sum += mass[t * num_states * num_actions + i];
    }
    return sum;
  }
};

inline OccupancyTable occupancy(const TabularMdp& mdp, const Policy& policy) {
  if (!policy.covers(mdp)) throw PreconditionError("policy does not cover the MDP");
  OccupancyTable out;
  out.horizon = mdp.horizon();
  out.num_states = mdp.num_states();
  out.num_actions = mdp.num_actions();
  out.mass.assign(out.horizon * out.num_states * out.num_actions, 0.0);
  if (mdp.horizon() == 0) return out;
  std::vector<double> state_mass(mdp.num_states(), 0.0);
  std::vector<double> next_mass(mdp.num_states(), 0.0);
  state_mass[mdp.start_state()] = 1.0;
  for (std::size_t t = 0; t < mdp.horizon(); ++t) {
    std::fill(next_mass.begin(), next_mass.end(), 0.0);
    for (StateIndex s = 0; s < mdp.num_states(); ++s) {
      if (state_mass[s] == 0.0) continue;
      for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
        const double mu = state_mass[s] * policy.prob(t, s, a);
        out.mass[(t * out.num_states + s) * out.num_actions + a] = mu;
        next_mass[mdp.next(s, a)] += mu;
      }
    }
    state_mass.swap(next_mass);
  }
  return out;
}

/// Discounted return of an open-loop action sequence from the start state.
inline double sequence_return(const TabularMdp& mdp, const std::vector<ActionIndex>& actions) {
  StateIndex s = mdp.start_state();
  double total = 0.0;
  double weight = 1.0;
  for (std::size_t t = 0; t < mdp.horizon() && t < actions.size(); ++t) {
    total += weight * mdp.reward(s, actions[t]);
    weight *= mdp.discount();
    s = mdp.next(s, actions[t]);
  }
  return total;
}

}  // namespace horizon
