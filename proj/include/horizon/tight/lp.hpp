#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "horizon/errors.hpp"
#include "horizon/tight/choice.hpp"

namespace horizon {

struct LpResult {
  double value = 1.0;
  bool infeasible = false;
};

/// max sum c_i p_i  s.t.  p_lo <= p <= p_hi, sum p = 1.
/// Filling the slack greedily in descending c is optimal for this LP.
inline LpResult aggregate_failure_lp(const std::vector<double>& c, const std::vector<double>& p_lo,
                                     const std::vector<double>& p_hi) {
  const std::size_t n = c.size();
  if (p_lo.size() != n || p_hi.size() != n) {
    throw PreconditionError("LP coefficient and bound vectors differ in length");
  }
  constexpr double slack = 1e-12;
  const double lo_total = std::accumulate(p_lo.begin(), p_lo.end(), 0.0);
  const double hi_total = std::accumulate(p_hi.begin(), p_hi.end(), 0.0);
  if (lo_total > 1.0 + slack || hi_total < 1.0 - slack) return {1.0, true};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return c[x] > c[y]; });
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) value += c[i] * p_lo[i];
  double remaining = 1.0 - lo_total;
  for (std::size_t i : order) {
    if (remaining <= 0.0) break;
    const double add = std::min(std::max(0.0, p_hi[i] - p_lo[i]), remaining);
    value += c[i] * add;
    remaining -= add;
  }
  return {value, false};
}

inline LpResult aggregate_failure_lp(const std::vector<double>& c, const ChoiceProbBounds& bounds) {
  return aggregate_failure_lp(c, bounds.p_lo, bounds.p_hi);
}

}  // namespace horizon
