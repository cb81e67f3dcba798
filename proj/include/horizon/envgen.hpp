#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "horizon/errors.hpp"
#include "horizon/mdp.hpp"
#include "horizon/simulator.hpp"

namespace horizon {

enum class ChainForm { consolidated, tree };

struct GeneratorOptions {
  ChainForm form = ChainForm::consolidated;
  std::size_t max_states = 10'000'000;
};

/// Incremental construction of an explicit MDP. New states self-loop with
/// zero reward until their actions are set.
class MdpBuilder {
 public:
  explicit MdpBuilder(std::size_t num_actions) : num_actions_(num_actions) {}

  StateIndex add_state(bool terminal = false) {
    const StateIndex s = terminal_.size();
    terminal_.push_back(terminal ? 1 : 0);
    for (ActionIndex a = 0; a < num_actions_; ++a) {
      next_.push_back(s);
      reward_.push_back(0.0);
    }
    return s;
  }

  void set(StateIndex s, ActionIndex a, StateIndex next, double reward) {
    next_[s * num_actions_ + a] = next;
    reward_[s * num_actions_ + a] = reward;
  }

  void set_all(StateIndex s, StateIndex next, double reward) {
    for (ActionIndex a = 0; a < num_actions_; ++a) set(s, a, next, reward);
  }

  std::size_t size() const { return terminal_.size(); }

  TabularMdp build(std::size_t horizon, StateIndex start, double discount = 1.0) const {
    return TabularMdp(terminal_.size(), num_actions_, horizon, start, next_, reward_, terminal_,
                      discount);
  }

 private:
  std::size_t num_actions_;
  std::vector<StateIndex> next_;
  std::vector<double> reward_;
  std::vector<std::uint8_t> terminal_;
};

/// Number of nodes in the full A-ary decision tree of depth T plus one sink,
/// or cap + 1 when that would exceed cap.
inline std::size_t tree_size_capped(std::size_t horizon, std::size_t num_actions,
                                    std::size_t cap) {
  std::size_t total = 1;
  std::size_t level = 1;
  for (std::size_t depth = 0; depth < horizon; ++depth) {
    total += level;
    if (total > cap) return cap + 1;
    if (depth + 1 < horizon) {
      if (level > (cap + 1) / std::max<std::size_t>(num_actions, 1)) return cap + 1;
      level *= num_actions;
    }
  }
  return total;
}

/// Expands an MDP into its decision tree: one state per action history of
/// length < T and a single terminal sink after the final action.
inline TabularMdp unroll_tree(const TabularMdp& mdp, std::size_t max_states = 10'000'000) {
  const std::size_t horizon = mdp.horizon();
  const std::size_t count = tree_size_capped(horizon, mdp.num_actions(), max_states);
  if (count > max_states) {
    throw CapExceeded("decision tree exceeds the state cap of " + std::to_string(max_states),
                      count);
  }
  MdpBuilder builder(mdp.num_actions());
  std::vector<StateIndex> underlying;
  const StateIndex root = builder.add_state();
  underlying.push_back(mdp.start_state());
  if (horizon == 0) return builder.build(0, root, mdp.discount());
  std::vector<StateIndex> layer{root};
  for (std::size_t depth = 0; depth + 1 < horizon; ++depth) {
    std::vector<StateIndex> next_layer;
    for (StateIndex node : layer) {
      for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
        const StateIndex child = builder.add_state();
        underlying.push_back(mdp.next(underlying[node], a));
        builder.set(node, a, child, mdp.reward(underlying[node], a));
        next_layer.push_back(child);
      }
    }
    layer.swap(next_layer);
  }
  const StateIndex sink = builder.add_state(true);
  for (StateIndex node : layer) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      builder.set(node, a, sink, mdp.reward(underlying[node], a));
    }
  }
  return builder.build(horizon, root, mdp.discount());
}

/// Simulator over action histories of an MDP; blobs are the history itself.
class UnrolledSimulator {
 public:
  explicit UnrolledSimulator(const TabularMdp& mdp) : mdp_(&mdp) {}

  std::size_t num_actions() const { return mdp_->num_actions(); }
  Blob initial_state() const { return Blob(); }
  StepResult step(const Blob& history, ActionIndex a) const {
    StateIndex s = mdp_->start_state();
    for (char c : history) s = mdp_->next(s, static_cast<unsigned char>(c));
    Blob next = history;
    next.push_back(static_cast<char>(a));
    return {next, mdp_->reward(s, a), next.size() >= mdp_->horizon()};
  }
  Blob observation_key(const Blob&) const { return Blob(); }

 private:
  const TabularMdp* mdp_;
};

namespace detail {

inline void check_chain_args(std::size_t horizon, std::size_t num_actions, std::size_t min_t,
                             const char* name) {
  if (horizon < min_t) {
    throw PreconditionError(std::string(name) + " needs T >= " + std::to_string(min_t));
  }
  if (num_actions < 2) throw PreconditionError(std::string(name) + " needs A >= 2");
}

inline TabularMdp finish(const TabularMdp& consolidated, const GeneratorOptions& options) {
  if (consolidated.num_states() > options.max_states) {
    throw CapExceeded("generator output exceeds the state cap", consolidated.num_states());
  }
  if (options.form == ChainForm::tree) return unroll_tree(consolidated, options.max_states);
  return consolidated;
}

inline std::vector<ActionIndex> default_target(std::size_t horizon, std::size_t num_actions) {
  return std::vector<ActionIndex>(horizon, num_actions - 1);
}

/// Path states p_0..p_{T-1}; following `target` walks the path, anything
/// else falls into an absorbing dead state. Rewards are filled in by caller.
struct PathSkeleton {
  MdpBuilder builder;
  std::vector<StateIndex> path;
  StateIndex dead;
  StateIndex goal;
};

inline PathSkeleton path_skeleton(std::size_t horizon, std::size_t num_actions,
                                  const std::vector<ActionIndex>& target) {
  PathSkeleton k{MdpBuilder(num_actions), {}, 0, 0};
  for (std::size_t i = 0; i < horizon; ++i) k.path.push_back(k.builder.add_state());
  k.dead = k.builder.add_state(true);
  k.goal = k.builder.add_state(true);
  for (std::size_t i = 0; i < horizon; ++i) {
    for (ActionIndex a = 0; a < num_actions; ++a) k.builder.set(k.path[i], a, k.dead, 0.0);
    const StateIndex onward = i + 1 < horizon ? k.path[i + 1] : k.goal;
    k.builder.set(k.path[i], target[i], onward, 0.0);
  }
  return k;
}

inline void check_target(const std::vector<ActionIndex>& target, std::size_t horizon,
                         std::size_t num_actions) {
  if (target.size() != horizon) throw PreconditionError("target sequence must have length T");
  for (ActionIndex a : target) {
    if (a >= num_actions) throw PreconditionError("target action out of range");
  }
}

}  // namespace detail

/// Only the exact target sequence is rewarded, with 1 on its final action.
inline TabularMdp make_needle_chain(std::size_t horizon, std::size_t num_actions,
                                    const std::vector<ActionIndex>& target,
                                    GeneratorOptions options = {}) {
  if (horizon < 1) throw PreconditionError("needle chain needs T >= 1");
  if (num_actions < 1) throw PreconditionError("needle chain needs A >= 1");
  detail::check_target(target, horizon, num_actions);
  auto k = detail::path_skeleton(horizon, num_actions, target);
  k.builder.set(k.path.back(), target.back(), k.goal, 1.0);
  return detail::finish(k.builder.build(horizon, k.path.front()), options);
}

inline TabularMdp make_needle_chain(std::size_t horizon, std::size_t num_actions,
                                    GeneratorOptions options = {}) {
  return make_needle_chain(horizon, num_actions, detail::default_target(horizon, num_actions),
                           options);
}

/// Every on-path action pays 1; the first deviation forfeits all later reward.
inline TabularMdp make_dense_chain(std::size_t horizon, std::size_t num_actions,
                                   GeneratorOptions options = {}) {
  detail::check_chain_args(horizon, num_actions, 1, "dense chain");
  const auto target = detail::default_target(horizon, num_actions);
  auto k = detail::path_skeleton(horizon, num_actions, target);
  for (std::size_t i = 0; i < horizon; ++i) {
    k.builder.set(k.path[i], target[i], i + 1 < horizon ? k.path[i + 1] : k.goal, 1.0);
  }
  return detail::finish(k.builder.build(horizon, k.path.front()), options);
}

/// Same returns as the dense chain, but the whole return is paid on the final
/// action: leaving the path at step j (0-based) yields j at the end.
inline TabularMdp make_delayed_chain(std::size_t horizon, std::size_t num_actions,
                                     GeneratorOptions options = {}) {
  detail::check_chain_args(horizon, num_actions, 1, "delayed chain");
  const auto target = detail::default_target(horizon, num_actions);
  auto k = detail::path_skeleton(horizon, num_actions, target);
  k.builder.set(k.path.back(), target.back(), k.goal, static_cast<double>(horizon));
  for (std::size_t j = 1; j < horizon; ++j) {
    const double owed = static_cast<double>(j);
    if (j + 1 == horizon) {
      for (ActionIndex a = 0; a < num_actions; ++a) {
        if (a != target[j]) k.builder.set(k.path[j], a, k.goal, owed);
      }
      continue;
    }
    // Countdown states for timesteps j+1 .. T-1 that remember the amount owed.
    std::vector<StateIndex> countdown;
    for (std::size_t t = j + 1; t < horizon; ++t) countdown.push_back(k.builder.add_state());
    for (std::size_t c = 0; c + 1 < countdown.size(); ++c) {
      k.builder.set_all(countdown[c], countdown[c + 1], 0.0);
    }
    k.builder.set_all(countdown.back(), k.goal, owed);
    for (ActionIndex a = 0; a < num_actions; ++a) {
      if (a != target[j]) k.builder.set(k.path[j], a, countdown.front(), 0.0);
    }
  }
  return detail::finish(k.builder.build(horizon, k.path.front()), options);
}

/// Needle of reward 1 at depth T plus a first-step action worth 3/4 that
/// ends the episode. Greedy play on Q^k takes the bait for every k < T.
inline TabularMdp make_adversarial_kT(std::size_t horizon, std::size_t num_actions,
                                      GeneratorOptions options = {}) {
  detail::check_chain_args(horizon, num_actions, 2, "adversarial MDP");
  const auto target = detail::default_target(horizon, num_actions);
  auto k = detail::path_skeleton(horizon, num_actions, target);
  k.builder.set(k.path.back(), target.back(), k.goal, 1.0);
  k.builder.set(k.path.front(), 0, k.dead, 0.75);
  return detail::finish(k.builder.build(horizon, k.path.front()), options);
}

/// A hidden action sequence (drawn from `seed`) pays 1 on steps H, 2H, ...
/// (1-based), so the optimal return is floor(T / H).
inline TabularMdp make_lowerbound_periodic(std::size_t horizon, std::size_t num_actions,
                                           std::size_t period, std::uint64_t seed = 0,
                                           GeneratorOptions options = {}) {
  if (period < 1 || period > horizon) throw PreconditionError("periodic MDP needs 1 <= H <= T");
  if (num_actions < 1) throw PreconditionError("periodic MDP needs A >= 1");
  std::mt19937_64 rng(seed);
  std::vector<ActionIndex> target(horizon);
  for (auto& a : target) a = std::uniform_int_distribution<ActionIndex>(0, num_actions - 1)(rng);
  auto k = detail::path_skeleton(horizon, num_actions, target);
  for (std::size_t i = 0; i < horizon; ++i) {
    if ((i + 1) % period == 0) {
      k.builder.set(k.path[i], target[i], i + 1 < horizon ? k.path[i + 1] : k.goal, 1.0);
    }
  }
  return detail::finish(k.builder.build(horizon, k.path.front()), options);
}

/// Action 0 walks a path paying 1 per step (total T); action A-1 from the
/// start enters a path that pays T-1 on its final action only.
inline TabularMdp make_distractor(std::size_t horizon, std::size_t num_actions,
                                  GeneratorOptions options = {}) {
  detail::check_chain_args(horizon, num_actions, 2, "distractor MDP");
  MdpBuilder b(num_actions);
  const StateIndex start = b.add_state();
  std::vector<StateIndex> left{start};
  std::vector<StateIndex> right{start};
  for (std::size_t i = 1; i < horizon; ++i) left.push_back(b.add_state());
  for (std::size_t i = 1; i < horizon; ++i) right.push_back(b.add_state());
  const StateIndex dead = b.add_state(true);
  const StateIndex goal = b.add_state(true);
  const ActionIndex go_right = num_actions - 1;
  for (std::size_t i = 0; i < horizon; ++i) {
    const bool last = i + 1 == horizon;
    b.set_all(left[i], dead, 0.0);
    if (i > 0) b.set_all(right[i], dead, 0.0);
    b.set(left[i], 0, last ? goal : left[i + 1], 1.0);
    if (i == 0) {
      b.set(start, go_right, right[1], 0.0);
    } else {
      b.set(right[i], go_right, last ? goal : right[i + 1],
            last ? static_cast<double>(horizon - 1) : 0.0);
    }
  }
  return detail::finish(b.build(horizon, start), options);
}

/// Full A-ary tree of depth T with rewards drawn from {0, 1/2, 1}; the coarse
/// reward alphabet makes many subtrees bisimilar.
inline TabularMdp make_random_tree(std::size_t horizon, std::size_t num_actions,
                                   std::uint64_t seed, std::size_t max_states = 10'000'000) {
  std::mt19937_64 rng(seed);
  MdpBuilder b(num_actions);
  const StateIndex hub = b.add_state();
  TabularMdp tree = unroll_tree(b.build(horizon, hub), max_states);
  std::vector<double> rewards = tree.rewards();
  std::uniform_int_distribution<int> pick(0, 5);
  for (StateIndex s = 0; s < tree.num_states(); ++s) {
    if (tree.is_terminal(s)) continue;
    for (ActionIndex a = 0; a < num_actions; ++a) {
      const int draw = pick(rng);
      rewards[s * num_actions + a] = draw < 4 ? 0.0 : (draw == 4 ? 0.5 : 1.0);
    }
  }
  return tree.with_rewards(std::move(rewards));
}

/// Layered random MDP: `width` states per timestep, each action jumps to a
/// random state of the next layer (or the sink, with small probability), and
/// the last layer always enters the terminal sink.
inline TabularMdp make_random_layered(std::size_t horizon, std::size_t num_actions,
                                      std::size_t width, std::uint64_t seed) {
  if (horizon < 1 || num_actions < 1 || width < 1) {
    throw PreconditionError("random layered MDP needs T, A, width >= 1");
  }
  std::mt19937_64 rng(seed);
  MdpBuilder b(num_actions);
  std::vector<std::vector<StateIndex>> layers(horizon);
  layers[0].push_back(b.add_state());
  for (std::size_t t = 1; t < horizon; ++t) {
    for (std::size_t w = 0; w < width; ++w) layers[t].push_back(b.add_state());
  }
  const StateIndex sink = b.add_state(true);
  std::uniform_real_distribution<double> reward(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, width - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t t = 0; t < horizon; ++t) {
    for (StateIndex s : layers[t]) {
      for (ActionIndex a = 0; a < num_actions; ++a) {
        const bool to_sink = t + 1 == horizon || coin(rng) < 0.1;
        b.set(s, a, to_sink ? sink : layers[t + 1][pick(rng)], std::round(reward(rng) * 4) / 4);
      }
    }
  }
  return b.build(horizon, layers[0][0]);
}

}  // namespace horizon
