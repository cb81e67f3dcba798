#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "horizon/mdp.hpp"

namespace horizon {

enum class QLabel { policy_q, qvi_iterate, optimal };

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

/// Relative tolerance used whenever two Q-values are compared for a tie.
inline constexpr double kTieTolerance = 1e-12;

inline bool ties_with(double value, double best) {
  if (std::isinf(value) || std::isinf(best)) return value == best;
  return std::abs(best - value) <= kTieTolerance * std::max(1.0, std::abs(best));
}

/// Values indexed by (t, s, a). Rows of states that are unreachable at t stay
/// NaN so accidental reads show up in results.
class QTable {
 public:
  QTable() = default;
  QTable(std::size_t horizon, std::size_t num_states, std::size_t num_actions, QLabel label)
      : horizon_(horizon),
        num_states_(num_states),
        num_actions_(num_actions),
        label_(label),
        values_(horizon * num_states * num_actions, kUnset) {}

  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t num_actions() const noexcept { return num_actions_; }
  QLabel label() const noexcept { return label_; }
  void set_label(QLabel label) noexcept { label_ = label; }

  double operator()(std::size_t t, StateIndex s, ActionIndex a) const {
    return values_[index(t, s, a)];
  }
  double& at(std::size_t t, StateIndex s, ActionIndex a) { return values_[index(t, s, a)]; }

  bool is_set(std::size_t t, StateIndex s) const { return !std::isnan(values_[index(t, s, 0)]); }

  double max_value(std::size_t t, StateIndex s) const {
    double best = -std::numeric_limits<double>::infinity();
    for (ActionIndex a = 0; a < num_actions_; ++a) best = std::max(best, (*this)(t, s, a));
    return best;
  }

  std::vector<ActionIndex> argmax(std::size_t t, StateIndex s) const {
    const double best = max_value(t, s);
    std::vector<ActionIndex> out;
    for (ActionIndex a = 0; a < num_actions_; ++a) {
      if (ties_with((*this)(t, s, a), best)) out.push_back(a);
    }
    return out;
  }

  bool in_argmax(std::size_t t, StateIndex s, ActionIndex a) const {
    return ties_with((*this)(t, s, a), max_value(t, s));
  }

  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t index(std::size_t t, StateIndex s, ActionIndex a) const {
    return (t * num_states_ + s) * num_actions_ + a;
  }

  std::size_t horizon_ = 0;
  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  QLabel label_ = QLabel::policy_q;
  std::vector<double> values_;
};

}  // namespace horizon
