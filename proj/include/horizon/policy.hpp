#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "horizon/errors.hpp"
#include "horizon/mdp.hpp"

namespace horizon {

/// Time-dependent action distribution. Uniform policies carry no table and
/// apply to any horizon and state count.
class Policy {
 public:
  enum class Kind { uniform, stochastic, deterministic };

  static Policy uniform(std::size_t num_actions) {
    if (num_actions == 0) throw PreconditionError("uniform policy needs A >= 1");
    Policy p;
    p.kind_ = Kind::uniform;
    p.num_actions_ = num_actions;
    return p;
  }

  /// probs is indexed [(t * S + s) * A + a].
  static Policy stochastic(std::size_t horizon, std::size_t num_states, std::size_t num_actions,
                           std::vector<double> probs) {
    if (probs.size() != horizon * num_states * num_actions) {
      throw SizeError("stochastic policy table has wrong size");
    }
    for (std::size_t row = 0; row < horizon * num_states; ++row) {
      double total = 0.0;
      for (std::size_t a = 0; a < num_actions; ++a) {
        const double v = probs[row * num_actions + a];
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw PreconditionError("policy row " + std::to_string(row) +
                                  " has a negative or non-finite probability");
        }
        total += v;
      }
      if (std::abs(total - 1.0) > 1e-9) {
        throw PreconditionError("policy row " + std::to_string(row) + " sums to " +
                                std::to_string(total));
      }
    }
    Policy p;
    p.kind_ = Kind::stochastic;
    p.horizon_ = horizon;
    p.num_states_ = num_states;
    p.num_actions_ = num_actions;
    p.probs_ = std::move(probs);
    return p;
  }

  /// actions is indexed [t * S + s].
  static Policy deterministic(std::size_t horizon, std::size_t num_states, std::size_t num_actions,
                              std::vector<ActionIndex> actions) {
    if (actions.size() != horizon * num_states) {
      throw SizeError("deterministic policy table has wrong size");
    }
    for (ActionIndex a : actions) {
      if (a >= num_actions) throw PreconditionError("deterministic policy action out of range");
    }
    Policy p;
    p.kind_ = Kind::deterministic;
    p.horizon_ = horizon;
    p.num_states_ = num_states;
    p.num_actions_ = num_actions;
    p.actions_ = std::move(actions);
    return p;
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t num_actions() const noexcept { return num_actions_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t num_states() const noexcept { return num_states_; }

  /// Whether this policy has a row for every (t, s) of the given MDP.
  bool covers(const TabularMdp& mdp) const {
    if (num_actions_ != mdp.num_actions()) return false;
    if (kind_ == Kind::uniform) return true;
    return horizon_ >= mdp.horizon() && num_states_ == mdp.num_states();
  }

  double prob(std::size_t t, StateIndex s, ActionIndex a) const {
    switch (kind_) {
      case Kind::uniform:
        return 1.0 / static_cast<double>(num_actions_);
      case Kind::stochastic:
        return probs_[(t * num_states_ + s) * num_actions_ + a];
      case Kind::deterministic:
        return actions_[t * num_states_ + s] == a ? 1.0 : 0.0;
    }
    return 0.0;
  }

  template <class Rng>
  ActionIndex sample(std::size_t t, StateIndex s, Rng& rng) const {
    switch (kind_) {
      case Kind::uniform:
        return std::uniform_int_distribution<ActionIndex>(0, num_actions_ - 1)(rng);
      case Kind::deterministic:
        return actions_[t * num_states_ + s];
      case Kind::stochastic: {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        double acc = 0.0;
        ActionIndex last_positive = 0;
        for (ActionIndex a = 0; a < num_actions_; ++a) {
          const double p = probs_[(t * num_states_ + s) * num_actions_ + a];
          if (p <= 0.0) continue;
          last_positive = a;
          acc += p;
          if (u < acc) return a;
        }
        return last_positive;
      }
    }
    return 0;
  }

  const std::vector<double>& probabilities() const noexcept { return probs_; }
  const std::vector<ActionIndex>& actions() const noexcept { return actions_; }

 private:
  Kind kind_ = Kind::uniform;
  std::size_t horizon_ = 0;
  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  std::vector<double> probs_;
  std::vector<ActionIndex> actions_;
};

}  // namespace horizon
