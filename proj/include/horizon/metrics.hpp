#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "horizon/errors.hpp"

namespace horizon {

// Both values are log10 timesteps; a missing empirical value means the
// learner did not converge within its budget.
struct PairedPoint {
  double bound = 0.0;
  std::optional<double> empirical;
};

using PairedSeries = std::vector<PairedPoint>;

inline std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> rank(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t q = i; q <= j; ++q) rank[order[q]] = r;
    i = j + 1;
  }
  return rank;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw PreconditionError("spearman needs equal-length series");
  if (x.size() < 3) throw PreconditionError("spearman needs at least 3 converged pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mean = 0.5 * static_cast<double>(x.size() + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) throw PreconditionError("spearman is undefined for a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double spearman(const PairedSeries& series) {
  std::vector<double> b, e;
  for (const auto& p : series) {
    if (!p.empirical) continue;
    b.push_back(p.bound);
    e.push_back(*p.empirical);
  }
  return spearman(b, e);
}

/// Median of max(N_b / N_e, N_e / N_b), computed as 10^median|log10 N_b - log10 N_e|.
inline double median_ratio(const PairedSeries& series) {
  std::vector<double> diff;
  for (const auto& p : series) {
    if (p.empirical) diff.push_back(std::abs(p.bound - *p.empirical));
  }
  if (diff.empty()) throw PreconditionError("median ratio needs at least one converged pair");
  std::sort(diff.begin(), diff.end());
  const std::size_t n = diff.size();
  const double mid = n % 2 == 1 ? diff[n / 2] : 0.5 * (diff[n / 2 - 1] + diff[n / 2]);
  return std::pow(10.0, mid);
}

/// Probability that a converged MDP has a smaller bound than a
/// non-converged one, ties counting one half. nullopt with a single class.
inline std::optional<double> auroc(const PairedSeries& series) {
  std::vector<double> pos, neg;
  for (const auto& p : series) (p.empirical ? pos : neg).push_back(p.bound);
  if (pos.empty() || neg.empty()) return std::nullopt;
  std::vector<double> all = pos;
  all.insert(all.end(), neg.begin(), neg.end());
  // Rank by descending bound so a higher rank means "more likely converged".
  for (double& v : all) v = -v;
  const auto rank = average_ranks(all);
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) pos_rank_sum += rank[i];
  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

/// Best accuracy of the rule "converged iff bound <= threshold" over all thresholds.
inline double best_threshold_accuracy(const PairedSeries& series) {
  if (series.empty()) throw PreconditionError("accuracy needs at least one point");
  std::vector<double> cuts{-INFINITY};
  for (const auto& p : series) cuts.push_back(p.bound);
  std::size_t best = 0;
  for (double cut : cuts) {
    std::size_t correct = 0;
    for (const auto& p : series) {
      if ((p.bound <= cut) == p.empirical.has_value()) ++correct;
    }
    best = std::max(best, correct);
  }
  return static_cast<double>(best) / static_cast<double>(series.size());
}

}  // namespace horizon
