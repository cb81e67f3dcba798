#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "horizon/dp.hpp"
#include "horizon/errors.hpp"
#include "horizon/mdp.hpp"
#include "horizon/policy.hpp"
#include "horizon/qtable.hpp"

namespace horizon {

/// Distribution summary of a single-episode return when a fixed action
/// sequence is followed by the exploration policy.
struct ReturnDistStats {
  double mean = 0.0;
  double support_lo = 0.0;
  double support_hi = 0.0;
  double variance = 0.0;
  double central_moment3 = 0.0;
  // E[X^3]; NaN unless every return is nonnegative.
  double raw_moment3 = std::numeric_limits<double>::quiet_NaN();
  // C when all mass sits on {0, C}; 0 for a point mass at 0.
  std::optional<double> two_point;

  bool point_mass() const { return support_hi - support_lo <= 1e-12 * std::max(1.0, std::abs(mean)); }
};

/// Moments of the return-to-go from (t, s) under the exploration policy,
/// for every t in [0, T] (row T is the empty return).
class TailMoments {
 public:
  /// Rows are filled only for states reachable at each timestep.
  TailMoments(const TabularMdp& mdp, const Policy& expl, const ReachableSets& reach)
      : num_states_(mdp.num_states()), rows_((mdp.horizon() + 1) * mdp.num_states()) {
    if (!expl.covers(mdp)) throw PreconditionError("exploration policy does not cover the MDP");
    const std::size_t horizon = mdp.horizon();
    for (StateIndex s = 0; s < num_states_; ++s) rows_[horizon * num_states_ + s] = zero();
    std::vector<Node> parts;
    std::vector<double> weights;
    for (std::size_t t = horizon; t-- > 0;) {
      for (StateIndex s : reach.states[t]) {
        parts.clear();
        weights.clear();
        for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
          const double p = expl.prob(t, s, a);
          if (p <= 0.0) continue;
          parts.push_back(shift(at(t + 1, mdp.next(s, a)), mdp.reward(s, a), mdp.discount()));
          weights.push_back(p);
        }
        rows_[t * num_states_ + s] = mix(parts, weights);
      }
    }
  }

  struct Node {
    double mean = 0.0;
    double variance = 0.0;
    double m3 = 0.0;  // central third moment
    double lo = 0.0;
    double hi = 0.0;
    // Up to two distinct support values; `overflow` once there are more.
    std::vector<double> support;
    bool overflow = false;
  };

  const Node& at(std::size_t t, StateIndex s) const { return rows_[t * num_states_ + s]; }

  static Node zero() {
    Node n;
    n.support = {0.0};
    return n;
  }

  /// Distribution of c + g * Y.
  static Node shift(const Node& y, double c, double g) {
    Node z;
    z.mean = c + g * y.mean;
    z.variance = g * g * y.variance;
    z.m3 = g * g * g * y.m3;
    z.lo = c + g * y.lo;
    z.hi = c + g * y.hi;
    z.overflow = y.overflow;
    for (double v : y.support) z.support.push_back(c + g * v);
    return z;
  }

  static void add_support(Node& n, double v) {
    if (n.overflow) return;
    for (double u : n.support) {
      if (ties_with(v, u) && ties_with(u, v)) return;
    }
    if (n.support.size() >= 2) {
      n.overflow = true;
      n.support.clear();
      return;
    }
    n.support.push_back(v);
  }

  static Node mix(const std::vector<Node>& parts, const std::vector<double>& weights) {
    Node out;
    double total = 0.0;
    for (double w : weights) total += w;
    for (std::size_t i = 0; i < parts.size(); ++i) out.mean += weights[i] / total * parts[i].mean;
    out.lo = std::numeric_limits<double>::infinity();
    out.hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const double w = weights[i] / total;
      const double d = parts[i].mean - out.mean;
      out.variance += w * (parts[i].variance + d * d);
      out.m3 += w * (parts[i].m3 + 3.0 * parts[i].variance * d + d * d * d);
      out.lo = std::min(out.lo, parts[i].lo);
      out.hi = std::max(out.hi, parts[i].hi);
      if (parts[i].overflow) {
        out.overflow = true;
        out.support.clear();
      }
      for (double v : parts[i].support) add_support(out, v);
    }
    out.variance = std::max(0.0, out.variance);
    return out;
  }

 private:
  std::size_t num_states_;
  std::vector<Node> rows_;
};

inline ReturnDistStats to_stats(const TailMoments::Node& n) {
  ReturnDistStats st;
  st.mean = n.mean;
  st.support_lo = std::min(n.lo, n.mean);
  st.support_hi = std::max(n.hi, n.mean);
  st.variance = std::max(0.0, n.variance);
  st.central_moment3 = n.m3;
  if (st.support_lo >= 0.0) {
    st.raw_moment3 = n.m3 + 3.0 * n.mean * st.variance + n.mean * n.mean * n.mean;
  }
  if (!n.overflow) {
    std::optional<double> c;
    bool ok = true;
    for (double v : n.support) {
      if (std::abs(v) <= 1e-12) continue;
      if (c && !ties_with(v, *c)) ok = false;
      c = v;
    }
    if (ok) st.two_point = c.value_or(0.0);
  }
  return st;
}

/// Number of sequences A^k, or nullopt when it exceeds `cap`.
inline std::optional<std::size_t> sequence_count(std::size_t num_actions, std::size_t k,
                                                 std::size_t cap) {
  std::size_t count = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (count > cap / std::max<std::size_t>(num_actions, 1)) return std::nullopt;
    count *= num_actions;
  }
  return count <= cap ? std::optional<std::size_t>(count) : std::nullopt;
}

/// Actions of sequence `index` in lexicographic order (first action most significant).
inline std::vector<ActionIndex> decode_sequence(std::size_t index, std::size_t num_actions,
                                                std::size_t k) {
  std::vector<ActionIndex> seq(k);
  for (std::size_t i = k; i-- > 0;) {
    seq[i] = index % num_actions;
    index /= num_actions;
  }
  return seq;
}

/// Return statistics for all A^k sequences taken from (t, s); actions that
/// would fall past the horizon are ignored.
inline std::vector<ReturnDistStats> return_stats(const TabularMdp& mdp, const TailMoments& tails,
                                                 std::size_t t, StateIndex s, std::size_t k,
                                                 std::size_t cap = 4096) {
  const auto count = sequence_count(mdp.num_actions(), k, cap);
  if (!count) {
    throw CapExceeded("A^k exceeds the sequence cap of " + std::to_string(cap),
                      cap + 1);
  }
  const std::size_t steps = std::min(k, mdp.horizon() - t);
  std::vector<ReturnDistStats> out;
  out.reserve(*count);
  for (std::size_t idx = 0; idx < *count; ++idx) {
    const auto seq = decode_sequence(idx, mdp.num_actions(), k);
    StateIndex cur = s;
    double prefix = 0.0;
    double weight = 1.0;
    for (std::size_t j = 0; j < steps; ++j) {
      prefix += weight * mdp.reward(cur, seq[j]);
      weight *= mdp.discount();
      cur = mdp.next(cur, seq[j]);
    }
    out.push_back(to_stats(TailMoments::shift(tails.at(t + steps, cur), prefix, weight)));
  }
  return out;
}

inline std::vector<ReturnDistStats> return_stats(const TabularMdp& mdp, const Policy& expl,
                                                 std::size_t t, StateIndex s, std::size_t k,
                                                 std::size_t cap = 4096) {
  if (t >= mdp.horizon()) throw PreconditionError("return_stats needs t < T");
  return return_stats(mdp, TailMoments(mdp, expl, reachable_sets(mdp)), t, s, k, cap);
}

}  // namespace horizon
