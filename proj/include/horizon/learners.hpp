#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "horizon/dp.hpp"
#include "horizon/errors.hpp"
#include "horizon/mdp.hpp"
#include "horizon/parallel.hpp"
#include "horizon/policy.hpp"
#include "horizon/qtable.hpp"
#include "horizon/tight/stats.hpp"

namespace horizon {

enum class TieBreak { lowest_index, seeded_random };

struct LearnerOptions {
  TieBreak ties = TieBreak::lowest_index;
  std::size_t max_sequences = std::size_t{1} << 22;
};

struct RunResult {
  std::vector<ActionIndex> actions;  // open-loop policy from the start state
  std::uint64_t timesteps = 0;       // episodes sampled times T
  bool success = false;
  std::uint64_t seed = 0;
  double achieved_return = 0.0;
  double optimal_return = 0.0;
  bool unobserved_pairs = false;  // FQI-GORP only: some backed-up entry was never sampled
};

using LearnerRng = std::mt19937_64;

inline LearnerRng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return LearnerRng(seq);
}

/// Seed for run `index` of a batch identified by `global_seed`.
inline std::uint64_t run_seed(std::uint64_t global_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(global_seed),
                    static_cast<std::uint32_t>(global_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t x, std::uint64_t y) {
  if (x != 0 && y > std::numeric_limits<std::uint64_t>::max() / x) {
    throw CapExceeded("timestep count overflows 64 bits", std::numeric_limits<std::uint64_t>::max());
  }
  return x * y;
}

inline std::size_t sequence_total(std::size_t num_actions, std::size_t k, std::size_t cap) {
  const auto count = sequence_count(num_actions, k, cap);
  if (!count) throw CapExceeded("A^k exceeds the sequence cap of " + std::to_string(cap), cap + 1);
  return *count;
}

/// Index of the best score; ties go to the lowest index or a uniform draw.
template <class Rng>
std::size_t pick_best(const std::vector<double>& score, TieBreak ties, Rng& rng) {
  double best = -std::numeric_limits<double>::infinity();
  for (double v : score) best = std::max(best, v);
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < score.size(); ++i) {
    if (ties_with(score[i], best)) {
      if (ties == TieBreak::lowest_index) return i;
      tied.push_back(i);
    }
  }
  return tied[std::uniform_int_distribution<std::size_t>(0, tied.size() - 1)(rng)];
}

/// Discounted reward-to-go from (t, s): forced actions first, then the
/// exploration policy. Stops once an absorbing terminal state is entered.
template <class Rng>
double rollout(const TabularMdp& mdp, const Policy& expl, std::size_t t, StateIndex s,
               const std::vector<ActionIndex>& forced, Rng& rng) {
  double total = 0.0;
  double weight = 1.0;
  for (std::size_t u = t; u < mdp.horizon(); ++u) {
    if (mdp.is_terminal(s)) break;
    const std::size_t offset = u - t;
    const ActionIndex a = offset < forced.size() ? forced[offset] : expl.sample(u, s, rng);
    total += weight * mdp.reward(s, a);
    weight *= mdp.discount();
    s = mdp.next(s, a);
  }
  return total;
}

inline RunResult finish_run(const TabularMdp& mdp, std::vector<ActionIndex> actions,
                            std::uint64_t timesteps, std::uint64_t seed) {
  RunResult r;
  r.actions = std::move(actions);
  r.timesteps = timesteps;
  r.seed = seed;
  r.achieved_return = sequence_return(mdp, r.actions);
  r.optimal_return = optimal_return(mdp);
  r.success = ties_with(r.achieved_return, r.optimal_return);
  return r;
}

}  // namespace detail

/// Greedy Over Random Policy: at each timestep, m rollouts per k-action
/// sequence, then commit to the first action of the best sequence.
inline RunResult gorp_run(const TabularMdp& mdp, const Policy& expl, std::size_t k, std::size_t m,
                          std::uint64_t seed, const LearnerOptions& options = {}) {
  if (m < 1) throw PreconditionError("GORP needs m >= 1");
  if (k < 1 || k > mdp.horizon()) throw PreconditionError("GORP needs 1 <= k <= T");
  if (!expl.covers(mdp)) throw PreconditionError("exploration policy does not cover the MDP");
  const std::size_t sequences = detail::sequence_total(mdp.num_actions(), k, options.max_sequences);
  auto rng = make_rng(seed);
  const std::size_t horizon = mdp.horizon();
  std::vector<ActionIndex> learned;
  std::vector<double> score(sequences);
  StateIndex s = mdp.start_state();
  for (std::size_t i = 0; i < horizon; ++i) {
    const std::size_t steps = std::min(k, horizon - i);
    for (std::size_t j = 0; j < sequences; ++j) {
      auto seq = decode_sequence(j, mdp.num_actions(), k);
      seq.resize(steps);
      double sum = 0.0;
      for (std::size_t r = 0; r < m; ++r) sum += detail::rollout(mdp, expl, i, s, seq, rng);
      score[j] = sum / static_cast<double>(m);
    }
    const std::size_t best = detail::pick_best(score, options.ties, rng);
    const ActionIndex a = decode_sequence(best, mdp.num_actions(), k).front();
    learned.push_back(a);
    s = mdp.next(s, a);
  }
  const std::uint64_t t = horizon;
  const std::uint64_t timesteps = detail::checked_mul(detail::checked_mul(t * t, sequences), m);
  return detail::finish_run(mdp, std::move(learned), timesteps, seed);
}

/// Policy-gradient variant: m on-policy episodes per timestep, importance
/// weighted by the exploration probability of the action taken at step i.
inline RunResult pg_gorp_run(const TabularMdp& mdp, const Policy& expl, std::size_t m,
                             std::uint64_t seed, const LearnerOptions& options = {}) {
  if (m < 1) throw PreconditionError("PG-GORP needs m >= 1");
  if (!expl.covers(mdp)) throw PreconditionError("exploration policy does not cover the MDP");
  auto rng = make_rng(seed);
  const std::size_t horizon = mdp.horizon();
  const std::size_t num_actions = mdp.num_actions();
  std::vector<ActionIndex> learned;
  std::vector<double> grad(num_actions);
  StateIndex s = mdp.start_state();
  const std::vector<ActionIndex> none;
  for (std::size_t i = 0; i < horizon; ++i) {
    for (ActionIndex a = 0; a < num_actions; ++a) {
      if (!(expl.prob(i, s, a) > 0.0)) {
        throw PreconditionError("exploration policy gives action " + std::to_string(a) +
                                " zero probability at timestep " + std::to_string(i));
      }
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      const ActionIndex a = expl.sample(i, s, rng);
      const double rest = i + 1 < horizon && !mdp.is_terminal(mdp.next(s, a))
                              ? detail::rollout(mdp, expl, i + 1, mdp.next(s, a), none, rng)
                              : 0.0;
      const double to_go = mdp.reward(s, a) + mdp.discount() * rest;
      grad[a] += to_go / expl.prob(i, s, a);
    }
    for (double& g : grad) g /= static_cast<double>(m);
    const ActionIndex a = detail::pick_best(grad, options.ties, rng);
    learned.push_back(a);
    s = mdp.next(s, a);
  }
  const std::uint64_t t = horizon;
  return detail::finish_run(mdp, std::move(learned), detail::checked_mul(t * t, m), seed);
}

/// Fitted-Q variant: A^k m exploration episodes per timestep, a tabular
/// regression of reward-to-go at step i+k-1, then k-1 backups to step i.
inline RunResult fqi_gorp_run(const TabularMdp& mdp, const Policy& expl, std::size_t k,
                              std::size_t m, std::uint64_t seed,
                              const LearnerOptions& options = {}) {
  if (m < 1) throw PreconditionError("FQI-GORP needs m >= 1");
  if (k < 1) throw PreconditionError("FQI-GORP needs k >= 1");
  if (!expl.covers(mdp)) throw PreconditionError("exploration policy does not cover the MDP");
  const std::size_t sequences = detail::sequence_total(mdp.num_actions(), k, options.max_sequences);
  const std::size_t episodes = sequences * m;
  const std::size_t horizon = mdp.horizon();
  const std::size_t num_actions = mdp.num_actions();
  auto rng = make_rng(seed);

  struct Row {
    std::vector<double> value;
    std::vector<std::uint32_t> count;
    std::vector<StateIndex> next;
  };
  const auto fresh_row = [&] {
    return Row{std::vector<double>(num_actions, 0.0), std::vector<std::uint32_t>(num_actions, 0),
               std::vector<StateIndex>(num_actions, 0)};
  };

  bool unobserved = false;
  std::vector<ActionIndex> learned;
  StateIndex s_i = mdp.start_state();
  std::vector<std::unordered_map<StateIndex, Row>> layers;
  for (std::size_t i = 0; i < horizon; ++i) {
    const std::size_t last = std::min(i + k, horizon) - 1;
    layers.assign(last - i + 1, {});
    for (std::size_t e = 0; e < episodes; ++e) {
      StateIndex s = s_i;
      for (std::size_t t = i; t < last; ++t) {
        const ActionIndex a = expl.sample(t, s, rng);
        auto [it, fresh] = layers[t - i].try_emplace(s);
        if (fresh) it->second = fresh_row();
        it->second.count[a] += 1;
        it->second.next[a] = mdp.next(s, a);
        s = mdp.next(s, a);
      }
      const ActionIndex a = expl.sample(last, s, rng);
      const std::vector<ActionIndex> forced{a};
      const double to_go = detail::rollout(mdp, expl, last, s, forced, rng);
      auto [it, fresh] = layers.back().try_emplace(s);
      if (fresh) it->second = fresh_row();
      it->second.value[a] += to_go;
      it->second.count[a] += 1;
    }
    for (auto& [s, row] : layers.back()) {
      for (ActionIndex a = 0; a < num_actions; ++a) {
        if (row.count[a] > 0) row.value[a] /= row.count[a];
      }
    }
    const auto best_observed = [&](const std::unordered_map<StateIndex, Row>& layer, StateIndex s) {
      const auto it = layer.find(s);
      if (it == layer.end()) {
        unobserved = true;
        return 0.0;
      }
      double best = -std::numeric_limits<double>::infinity();
      for (ActionIndex a = 0; a < num_actions; ++a) {
        if (it->second.count[a] == 0) unobserved = true;
        best = std::max(best, it->second.count[a] > 0 ? it->second.value[a] : 0.0);
      }
      return best;
    };
    for (std::size_t d = layers.size() - 1; d-- > 0;) {
      for (auto& [s, row] : layers[d]) {
        for (ActionIndex a = 0; a < num_actions; ++a) {
          if (row.count[a] == 0) continue;
          row.value[a] = mdp.reward(s, a) + mdp.discount() * best_observed(layers[d + 1], row.next[a]);
        }
      }
    }
    std::vector<double> q(num_actions, 0.0);
    const Row& root = layers.front().at(s_i);
    for (ActionIndex a = 0; a < num_actions; ++a) {
      if (root.count[a] > 0) {
        q[a] = root.value[a];
      } else {
        unobserved = true;
      }
    }
    const ActionIndex a = detail::pick_best(q, options.ties, rng);
    learned.push_back(a);
    s_i = mdp.next(s_i, a);
  }
  const std::uint64_t t = horizon;
  RunResult r = detail::finish_run(
      mdp, std::move(learned), detail::checked_mul(detail::checked_mul(t * t, sequences), m), seed);
  r.unobserved_pairs = unobserved;
  return r;
}

/// Deterministic planner that scores each W-step sequence by the rewards
/// inside the window only, one episode per sequence.
inline RunResult plan_over_window(const TabularMdp& mdp, std::size_t window,
                                  const LearnerOptions& options = {}) {
  if (window < 1 || window > mdp.horizon()) throw PreconditionError("window must lie in [1, T]");
  const std::size_t sequences =
      detail::sequence_total(mdp.num_actions(), window, options.max_sequences);
  const std::size_t horizon = mdp.horizon();
  std::vector<ActionIndex> learned;
  std::vector<double> score(sequences);
  StateIndex s_i = mdp.start_state();
  LearnerRng unused;
  for (std::size_t i = 0; i < horizon; ++i) {
    const std::size_t steps = std::min(window, horizon - i);
    for (std::size_t j = 0; j < sequences; ++j) {
      const auto seq = decode_sequence(j, mdp.num_actions(), window);
      StateIndex s = s_i;
      double total = 0.0;
      double weight = 1.0;
      for (std::size_t d = 0; d < steps; ++d) {
        total += weight * mdp.reward(s, seq[d]);
        weight *= mdp.discount();
        s = mdp.next(s, seq[d]);
      }
      score[j] = total;
    }
    const std::size_t best = detail::pick_best(score, TieBreak::lowest_index, unused);
    const ActionIndex a = decode_sequence(best, mdp.num_actions(), window).front();
    learned.push_back(a);
    s_i = mdp.next(s_i, a);
  }
  const std::uint64_t t = horizon;
  return detail::finish_run(mdp, std::move(learned), detail::checked_mul(t * t, sequences), 0);
}

/// R-max: optimistic model with unknown pairs self-looping at the largest
/// reward; replans whenever the previous timestep taught it something.
inline RunResult rmax_run(const TabularMdp& mdp) {
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  const std::size_t horizon = mdp.horizon();
  const double r_max = mdp.max_reward();
  std::vector<StateIndex> model_next(S * A);
  std::vector<double> model_reward(S * A, r_max);
  std::vector<std::uint8_t> known(S * A, 0);
  for (StateIndex s = 0; s < S; ++s) {
    for (ActionIndex a = 0; a < A; ++a) model_next[s * A + a] = s;
  }
  // plan[t * S + s] is the greedy action at (t, s) under the current model.
  std::vector<ActionIndex> plan(horizon * S, 0);
  std::vector<double> value(S), next_value(S);
  const auto replan = [&] {
    std::fill(next_value.begin(), next_value.end(), 0.0);
    for (std::size_t t = horizon; t-- > 0;) {
      for (StateIndex s = 0; s < S; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        ActionIndex arg = 0;
        for (ActionIndex a = 0; a < A; ++a) {
          const double q = model_reward[s * A + a] + mdp.discount() * next_value[model_next[s * A + a]];
          if (q > best && !ties_with(q, best)) {
            best = q;
            arg = a;
          }
        }
        value[s] = best;
        plan[t * S + s] = arg;
      }
      value.swap(next_value);
    }
  };
  replan();
  const std::size_t max_episodes = S * A;
  std::uint64_t episodes = 0;
  while (episodes < max_episodes) {
    ++episodes;
    bool learned_any = false;
    bool changed = false;
    StateIndex s = mdp.start_state();
    for (std::size_t t = 0; t < horizon; ++t) {
      if (changed) {
        replan();
        changed = false;
      }
      const ActionIndex a = plan[t * S + s];
      const std::size_t idx = s * A + a;
      if (!known[idx]) {
        known[idx] = 1;
        model_next[idx] = mdp.next(s, a);
        model_reward[idx] = mdp.reward(s, a);
        changed = learned_any = true;
      }
      s = mdp.next(s, a);
    }
    if (changed) replan();
    if (!learned_any) break;
  }
  std::vector<ActionIndex> actions;
  StateIndex s = mdp.start_state();
  for (std::size_t t = 0; t < horizon; ++t) {
    actions.push_back(plan[t * S + s]);
    s = mdp.next(s, actions.back());
  }
  return detail::finish_run(mdp, std::move(actions), episodes * horizon, 0);
}

struct EmpiricalComplexity {
  bool converged = false;
  double median_timesteps = std::numeric_limits<double>::infinity();
  std::size_t successes = 0;
  std::size_t seeds = 0;
};

/// Median over seeds of the timesteps a runner needed, counting failures
/// and runs over `budget` as infinite.
template <class Runner>
EmpiricalComplexity empirical_sample_complexity(Runner&& runner,
                                                const std::vector<std::uint64_t>& seeds,
                                                std::optional<double> budget = std::nullopt,
                                                std::size_t workers = 1) {
  if (seeds.empty() || seeds.size() % 2 == 0) {
    throw PreconditionError("empirical sample complexity needs an odd number of seeds");
  }
  std::vector<double> cost(seeds.size());
  parallel_for(seeds.size(), workers, [&](std::size_t i) {
    const RunResult r = runner(seeds[i]);
    const double used = static_cast<double>(r.timesteps);
    cost[i] = r.success && (!budget || used <= *budget) ? used
                                                         : std::numeric_limits<double>::infinity();
  });
  EmpiricalComplexity out;
  out.seeds = seeds.size();
  out.successes = static_cast<std::size_t>(
      std::count_if(cost.begin(), cost.end(), [](double c) { return std::isfinite(c); }));
  auto mid = cost.begin() + static_cast<std::ptrdiff_t>(cost.size() / 2);
  std::nth_element(cost.begin(), mid, cost.end());
  out.median_timesteps = *mid;
  out.converged = std::isfinite(out.median_timesteps);
  return out;
}

struct EmpiricalMinM {
  bool found = false;
  std::size_t m = 0;
  double effective = std::numeric_limits<double>::infinity();  // k + log_A m
  std::size_t successes = 0;
  double log10_timesteps = std::numeric_limits<double>::infinity();
};

/// Smallest m for which GORP succeeds on at least half the seeds: doubling,
/// then bisection between the last failing and first passing m.
inline EmpiricalMinM empirical_min_m(const TabularMdp& mdp, const Policy& expl, std::size_t k,
                                     const std::vector<std::uint64_t>& seeds,
                                     std::size_t m_cap = std::size_t{1} << 20,
                                     std::size_t workers = 1, const LearnerOptions& options = {}) {
  if (seeds.empty()) throw PreconditionError("empirical_min_m needs at least one seed");
  const auto successes = [&](std::size_t m) {
    std::vector<std::uint8_t> ok(seeds.size(), 0);
    parallel_for(seeds.size(), workers, [&](std::size_t i) {
      ok[i] = gorp_run(mdp, expl, k, m, seeds[i], options).success ? 1 : 0;
    });
    return static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
  };
  const auto passes = [&](std::size_t count) { return 2 * count >= seeds.size(); };
  EmpiricalMinM out;
  std::size_t lo = 0;
  std::size_t hi = 1;
  std::size_t hi_count = successes(1);
  while (!passes(hi_count)) {
    if (hi >= m_cap) return out;
    lo = hi;
    hi = std::min(hi * 2, m_cap);
    hi_count = successes(hi);
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::size_t count = successes(mid);
    if (passes(count)) {
      hi = mid;
      hi_count = count;
    } else {
      lo = mid;
    }
  }
  out.found = true;
  out.m = hi;
  out.successes = hi_count;
  const double log_a = std::log(static_cast<double>(mdp.num_actions()));
  out.effective = static_cast<double>(k) +
                  (log_a > 0.0 ? std::log(static_cast<double>(hi)) / log_a : 0.0);
  out.log10_timesteps = 2.0 * std::log10(static_cast<double>(mdp.horizon())) +
                        std::log10(static_cast<double>(hi)) +
                        static_cast<double>(k) * std::log10(static_cast<double>(mdp.num_actions()));
  return out;
}

}  // namespace horizon
