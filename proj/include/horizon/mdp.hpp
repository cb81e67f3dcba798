#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "horizon/errors.hpp"

namespace horizon {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

/// Deterministic finite-horizon MDP stored as dense S x A tables.
///
/// Timesteps are numbered 0..T-1. Terminal states are absorbing: they loop
/// to themselves under every action and pay nothing.
class TabularMdp {
 public:
  TabularMdp() = default;

  TabularMdp(std::size_t num_states, std::size_t num_actions, std::size_t horizon,
             StateIndex start_state, std::vector<StateIndex> transitions,
             std::vector<double> rewards, std::vector<std::uint8_t> terminal_flags,
             double discount = 1.0)
      : num_states_(num_states),
        num_actions_(num_actions),
        horizon_(horizon),
        start_state_(start_state),
        discount_(discount),
        transitions_(std::move(transitions)),
        rewards_(std::move(rewards)),
        terminal_(std::move(terminal_flags)) {
    if (num_states_ == 0 || num_actions_ == 0) {
      throw PreconditionError("MDP needs at least one state and one action");
    }
    if (start_state_ >= num_states_) {
      throw PreconditionError("start state " + std::to_string(start_state_) +
                              " out of range");
    }
    if (!(discount_ > 0.0 && discount_ <= 1.0)) {
      throw PreconditionError("discount must lie in (0, 1]");
    }
    const std::size_t cells = num_states_ * num_actions_;
    if (transitions_.size() != cells || rewards_.size() != cells ||
        terminal_.size() != num_states_) {
      throw SizeError("MDP tables do not match S=" + std::to_string(num_states_) +
                      ", A=" + std::to_string(num_actions_));
    }
  }

  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t num_actions() const noexcept { return num_actions_; }
  std::size_t horizon() const noexcept { return horizon_; }
  StateIndex start_state() const noexcept { return start_state_; }
  double discount() const noexcept { return discount_; }

  StateIndex next(StateIndex s, ActionIndex a) const {
    return transitions_[s * num_actions_ + a];
  }
  double reward(StateIndex s, ActionIndex a) const { return rewards_[s * num_actions_ + a]; }
  bool is_terminal(StateIndex s) const { return terminal_[s] != 0; }

  const std::vector<StateIndex>& transitions() const noexcept { return transitions_; }
  const std::vector<double>& rewards() const noexcept { return rewards_; }
  const std::vector<std::uint8_t>& terminal_flags() const noexcept { return terminal_; }

  double max_reward() const {
    double best = rewards_.empty() ? 0.0 : rewards_.front();
    for (double r : rewards_) best = std::max(best, r);
    return best;
  }
  double min_reward() const {
    double worst = rewards_.empty() ? 0.0 : rewards_.front();
    for (double r : rewards_) worst = std::min(worst, r);
    return worst;
  }

  TabularMdp with_rewards(std::vector<double> rewards) const {
    return TabularMdp(num_states_, num_actions_, horizon_, start_state_, transitions_,
                      std::move(rewards), terminal_, discount_);
  }
  TabularMdp with_horizon(std::size_t horizon) const {
    TabularMdp copy = *this;
    copy.horizon_ = horizon;
    return copy;
  }

  friend bool operator==(const TabularMdp& x, const TabularMdp& y) = default;

 private:
  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  std::size_t horizon_ = 0;
  StateIndex start_state_ = 0;
  double discount_ = 1.0;
  std::vector<StateIndex> transitions_;
  std::vector<double> rewards_;
  std::vector<std::uint8_t> terminal_;
};

struct Violation {
  enum class Kind { transition_out_of_range, terminal_not_absorbing, terminal_reward, nonfinite_reward };
  Kind kind;
  StateIndex state;
  ActionIndex action;
  std::string message;
};

inline std::vector<Violation> validate(const TabularMdp& mdp) {
  std::vector<Violation> out;
  const auto pair_name = [](StateIndex s, ActionIndex a) {
    return "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
  };
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      const StateIndex nxt = mdp.next(s, a);
      const double r = mdp.reward(s, a);
      if (nxt >= mdp.num_states()) {
        out.push_back({Violation::Kind::transition_out_of_range, s, a,
                       "transition " + pair_name(s, a) + " -> " + std::to_string(nxt) +
                           " is out of range"});
      }
      if (!std::isfinite(r)) {
        out.push_back({Violation::Kind::nonfinite_reward, s, a,
                       "reward " + pair_name(s, a) + " is not finite"});
      }
      if (mdp.is_terminal(s)) {
        if (nxt != s) {
          out.push_back({Violation::Kind::terminal_not_absorbing, s, a,
                         "terminal state " + pair_name(s, a) + " does not self-loop"});
        }
        if (r != 0.0 && std::isfinite(r)) {
          out.push_back({Violation::Kind::terminal_reward, s, a,
                         "terminal state " + pair_name(s, a) + " has nonzero reward"});
        }
      }
    }
  }
  return out;
}

struct ShapingPotential {
  std::vector<double> phi;
};

/// Adds discount * phi(next) - phi(current) to every non-terminal reward.
inline TabularMdp apply_shaping(const TabularMdp& mdp, const ShapingPotential& potential) {
  if (potential.phi.size() != mdp.num_states()) {
    throw PreconditionError("shaping potential must give one value per state");
  }
  for (double v : potential.phi) {
    if (!std::isfinite(v)) throw PreconditionError("shaping potential must be finite");
  }
  std::vector<double> shaped = mdp.rewards();
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    if (mdp.is_terminal(s)) continue;
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      shaped[s * mdp.num_actions() + a] +=
          mdp.discount() * potential.phi[mdp.next(s, a)] - potential.phi[s];
    }
  }
  return mdp.with_rewards(std::move(shaped));
}

}  // namespace horizon
