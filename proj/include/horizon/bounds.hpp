#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "horizon/dp.hpp"
#include "horizon/errors.hpp"
#include "horizon/mdp.hpp"
#include "horizon/policy.hpp"

namespace horizon {

/// A timestep count that may be far beyond 64-bit range. `value` is kept
/// only while the count is below 2^63.
struct TimestepCount {
  double log10_value = 0.0;
  std::optional<double> value;

  bool infinite() const { return std::isinf(log10_value); }

  static TimestepCount from_value(double v) {
    TimestepCount c;
    c.log10_value = std::log10(v);
    if (v < 9.2e18) c.value = v;
    return c;
  }
  static TimestepCount from_log10(double lg) {
    if (lg < 18.9) return from_value(std::pow(10.0, lg));
    TimestepCount c;
    c.log10_value = lg;
    return c;
  }
  static TimestepCount infinity() {
    TimestepCount c;
    c.log10_value = std::numeric_limits<double>::infinity();
    return c;
  }
};

inline double log_base(double x, double base) { return std::log(x) / std::log(base); }

/// Exhaustive search over action sequences: T * ceil(A^T / 2).
inline TimestepCount worst_case_bound(std::size_t num_actions, std::size_t horizon) {
  const double lg_sequences = static_cast<double>(horizon) * std::log10(num_actions);
  if (lg_sequences < 18.0) {
    std::uint64_t sequences = 1;
    for (std::size_t i = 0; i < horizon; ++i) sequences *= num_actions;
    return TimestepCount::from_value(static_cast<double>(horizon) *
                                     static_cast<double>((sequences + 1) / 2));
  }
  return TimestepCount::from_log10(std::log10(horizon) + lg_sequences - std::log10(2.0));
}

/// GORP with lookahead and rollouts summarised by H: T^2 * A^H.
inline TimestepCount gorp_bound(std::size_t horizon, std::size_t num_actions, double effective) {
  if (std::isinf(effective)) return TimestepCount::infinity();
  const double lg = 2.0 * std::log10(horizon) + effective * std::log10(num_actions);
  if (lg >= 18.9) return TimestepCount::from_log10(lg);
  const double t = static_cast<double>(horizon);
  return TimestepCount::from_value(t * t * std::pow(static_cast<double>(num_actions), effective));
}

inline TimestepCount ucb_bound(const TabularMdp& mdp) {
  return TimestepCount::from_value(static_cast<double>(mdp.num_states()) *
                                   static_cast<double>(mdp.num_actions()) *
                                   static_cast<double>(mdp.horizon()));
}

struct CoveringLength {
  double lower = 0.0;        // ln 2 / (2 min_{s,a} sum_t mu)
  double upper = 0.0;        // ceil(ln(2SA) / min_{s,a} max_t mu)
  TimestepCount timesteps;   // T * upper
  double min_total_occupancy = 0.0;
  double min_peak_occupancy = 0.0;
  bool infinite = false;
};

/// Episodes needed for the exploration policy to visit every reachable
/// state-action pair. With `per_timestep_union` the log term uses 2SAT.
inline CoveringLength covering_length_bounds(const TabularMdp& mdp, const Policy& expl,
                                             bool per_timestep_union = false) {
  const ReachableSets reach = reachable_sets(mdp);
  const OccupancyTable occ = occupancy(mdp, expl);
  std::vector<std::uint8_t> seen(mdp.num_states(), 0);
  for (std::size_t t = 0; t < mdp.horizon(); ++t) {
    for (StateIndex s : reach.states[t]) seen[s] = 1;
  }
  CoveringLength out;
  double min_total = std::numeric_limits<double>::infinity();
  double min_peak = std::numeric_limits<double>::infinity();
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    if (!seen[s]) continue;
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      double total = 0.0;
      double peak = 0.0;
      for (std::size_t t = 0; t < mdp.horizon(); ++t) {
        total += occ.at(t, s, a);
        peak = std::max(peak, occ.at(t, s, a));
      }
      min_total = std::min(min_total, total);
      min_peak = std::min(min_peak, peak);
    }
  }
  out.min_total_occupancy = min_total;
  out.min_peak_occupancy = min_peak;
  if (!(min_peak > 0.0) || std::isinf(min_peak)) {
    out.infinite = true;
    out.lower = out.upper = std::numeric_limits<double>::infinity();
    out.timesteps = TimestepCount::infinity();
    return out;
  }
  const double sa = static_cast<double>(mdp.num_states()) * static_cast<double>(mdp.num_actions());
  const double log_term = per_timestep_union
                              ? std::log(2.0 * sa * static_cast<double>(mdp.horizon()))
                              : std::log(2.0 * sa);
  out.lower = std::log(2.0) / (2.0 * min_total);
  out.upper = std::ceil(log_term / min_peak);
  const double lg = std::log10(static_cast<double>(mdp.horizon())) + std::log10(out.upper);
  out.timesteps = lg < 18.9 ? TimestepCount::from_value(static_cast<double>(mdp.horizon()) * out.upper)
                            : TimestepCount::from_log10(lg);
  return out;
}

inline TimestepCount epw_bound(const TabularMdp& mdp, std::size_t window) {
  return gorp_bound(mdp.horizon(), mdp.num_actions(), static_cast<double>(window));
}

inline TimestepCount epw_bound(const TabularMdp& mdp) { return epw_bound(mdp, epw(mdp)); }

struct Theorem4Result {
  std::size_t k = 0;
  double log10_m = 0.0;       // m may exceed double range only in principle
  double effective = 0.0;     // k + log_A m
  TimestepCount timesteps;    // T^2 A^k m
  double worst_ratio = 0.0;   // max Q^k V* / gap^2 over optimal-reachable states
};

/// Closed-form rollout count for k-QVI-solvable MDPs with nonnegative rewards.
inline Theorem4Result theorem4_bound(const TabularMdp& mdp, const Policy& expl, std::size_t k) {
  if (k < 1 || k > std::max<std::size_t>(mdp.horizon(), 1)) {
    throw PreconditionError("lookahead k must lie in [1, T]");
  }
  if (mdp.min_reward() < 0.0) {
    throw PreconditionError("theorem-4 bound requires nonnegative rewards");
  }
  const ReachableSets reach = reachable_sets(mdp);
  const QTable qk = qk_table(mdp, expl, k, reach);
  const QTable qstar = optimal_q(mdp, reach);
  if (!greedy_policies_optimal(mdp, qk, qstar)) {
    throw PreconditionError("MDP is not " + std::to_string(k) + "-QVI-solvable");
  }
  const GapTable gap = gaps(mdp, qk, reach);
  const auto opt_sets = optimal_state_sets(mdp, qstar);
  double worst = 0.0;
  for (std::size_t t = 0; t < mdp.horizon(); ++t) {
    for (StateIndex s : opt_sets[t]) {
      if (gap.ties(t, s)) continue;
      const double v_star = qstar.max_value(t, s);
      const double delta = gap.at(t, s);
      for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
        worst = std::max(worst, qk(t, s, a) * v_star / (delta * delta));
      }
    }
  }
  Theorem4Result out;
  out.k = k;
  out.worst_ratio = worst;
  const double lnA = std::log(static_cast<double>(mdp.num_actions()));
  const double log_term =
      std::log(2.0) + std::log(static_cast<double>(mdp.horizon())) + static_cast<double>(k) * lnA;
  const double m = std::max(1.0, std::ceil(6.0 * log_term * worst));
  out.log10_m = std::log10(m);
  out.effective = mdp.num_actions() > 1 ? static_cast<double>(k) + std::log(m) / lnA
                                        : static_cast<double>(k);
  const double lg = 2.0 * std::log10(mdp.horizon()) +
                    static_cast<double>(k) * std::log10(mdp.num_actions()) + out.log10_m;
  const double t = static_cast<double>(mdp.horizon());
  out.timesteps = lg < 18.9 ? TimestepCount::from_value(
                                  t * t * std::pow(static_cast<double>(mdp.num_actions()),
                                                   static_cast<double>(k)) * m)
                            : TimestepCount::from_log10(lg);
  return out;
}

struct GoalCheck {
  bool ok = false;
  std::string failed_clause;
  std::vector<std::uint8_t> goal_set;
};

/// Goal states are absorbing states entered from elsewhere with reward 1;
/// a goal MDP pays exactly 1 on entering that set and 0 everywhere else.
inline GoalCheck check_goal_mdp(const TabularMdp& mdp) {
  GoalCheck out;
  const std::size_t n = mdp.num_states();
  out.goal_set.assign(n, 0);
  const auto absorbing = [&](StateIndex s) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      if (mdp.next(s, a) != s) return false;
    }
    return true;
  };
  for (StateIndex s = 0; s < n; ++s) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      const StateIndex g = mdp.next(s, a);
      if (g != s && mdp.reward(s, a) == 1.0 && absorbing(g)) out.goal_set[g] = 1;
    }
  }
  for (StateIndex s = 0; s < n; ++s) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      const double r = mdp.reward(s, a);
      const bool in_goal = out.goal_set[s] != 0;
      const bool enters = !in_goal && out.goal_set[mdp.next(s, a)] != 0;
      const std::string where = " at (s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
      if (r != 0.0 && r != 1.0) {
        out.failed_clause = "rewards must be 0 or 1: found " + std::to_string(r) + where;
        return out;
      }
      if (in_goal && r != 0.0) {
        out.failed_clause = "goal states must pay 0" + where;
        return out;
      }
      if (enters && r != 1.0) {
        out.failed_clause = "entering the goal set must pay 1" + where;
        return out;
      }
      if (!enters && r == 1.0) {
        out.failed_clause = "reward 1 is paid without entering an absorbing goal state" + where;
        return out;
      }
    }
  }
  out.ok = true;
  return out;
}

struct GoalBound {
  double p = 1.0;          // smallest goal-reaching probability along optimal actions
  double effective = 1.0;  // 1 + log_A(ln(2T) / p)
};

inline GoalBound goal_mdp_bound(const TabularMdp& mdp, const Policy& expl) {
  const GoalCheck check = check_goal_mdp(mdp);
  if (!check.ok) throw PreconditionError("not a goal MDP: " + check.failed_clause);
  const ReachableSets reach = reachable_sets(mdp);
  const QTable qstar = optimal_q(mdp, reach);
  const QTable qexpl = policy_q(mdp, expl, reach);
  double p = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mdp.horizon(); ++t) {
    for (StateIndex s : reach.states[t]) {
      for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
        if (ties_with(qstar(t, s, a), 1.0)) p = std::min(p, qexpl(t, s, a));
      }
    }
  }
  GoalBound out;
  if (std::isinf(p)) return out;  // the goal is unreachable: every policy is optimal
  out.p = p;
  if (mdp.num_actions() == 1) return out;
  if (p <= 0.0) {
    out.effective = std::numeric_limits<double>::infinity();
    return out;
  }
  out.effective = 1.0 + log_base(std::log(2.0 * static_cast<double>(mdp.horizon())) / p,
                                 static_cast<double>(mdp.num_actions()));
  return out;
}

}  // namespace horizon
