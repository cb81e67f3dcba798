#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "horizon/dp.hpp"
#include "horizon/errors.hpp"
#include "horizon/mdp.hpp"
#include "horizon/parallel.hpp"
#include "horizon/policy.hpp"
#include "horizon/tight/choice.hpp"
#include "horizon/tight/lp.hpp"
#include "horizon/tight/stats.hpp"

namespace horizon {

struct TightOptions {
  std::size_t partition = 100;
  std::size_t max_sequences = 4096;
  double max_log10_m = 100.0;
  double relative_precision = 0.01;
  std::vector<BoundMethod> methods{BoundMethod::bennett, BoundMethod::bernstein,
                                   BoundMethod::berry_esseen, BoundMethod::binomial};
  std::size_t workers = 1;
};

/// Everything about (mdp, expl, k) that does not depend on m: the tree of
/// states reachable through optimal actions and the return statistics of
/// every sequence at each of its nodes.
class FailureModel {
 public:
  FailureModel(const TabularMdp& mdp, const Policy& expl, std::size_t k,
               const TightOptions& options = {})
      : mdp_(&mdp), k_(k), options_(options) {
    if (k < 1) throw PreconditionError("lookahead k must be at least 1");
    const auto count = sequence_count(mdp.num_actions(), k, options.max_sequences);
    if (!count) {
      throw CapExceeded("A^k exceeds the sequence cap of " + std::to_string(options.max_sequences),
                        options.max_sequences + 1);
    }
    sequences_ = *count;
    per_first_action_ = sequences_ / mdp.num_actions();
    const ReachableSets reach = reachable_sets(mdp);
    const QTable qstar = optimal_q(mdp, reach);
    const TailMoments tails(mdp, expl, reach);
    const auto opt_sets = optimal_state_sets(mdp, qstar);
    layers_.resize(mdp.horizon());
    node_of_.assign(mdp.horizon(), std::vector<std::size_t>(mdp.num_states(), kNoNode));
    for (std::size_t t = 0; t < mdp.horizon(); ++t) {
      for (StateIndex s : opt_sets[t]) {
        Node node;
        node.t = t;
        node.s = s;
        node.optimal.assign(mdp.num_actions(), 0);
        for (ActionIndex a : qstar.argmax(t, s)) node.optimal[a] = 1;
        node.stats = return_stats(mdp, tails, t, s, k, options.max_sequences);
        node_of_[t][s] = nodes_.size();
        layers_[t].push_back(nodes_.size());
        nodes_.push_back(std::move(node));
      }
    }
  }

  std::size_t k() const { return k_; }
  const TabularMdp& mdp() const { return *mdp_; }
  const TightOptions& options() const { return options_; }
  std::size_t node_count() const { return nodes_.size(); }

  /// Upper bound on the probability that GORP with m rollouts per sequence
  /// ever commits to a suboptimal action.
  double failure_probability(double m) const {
    if (mdp_->horizon() == 0 || mdp_->num_actions() == 1) return 0.0;
    std::vector<double> value(nodes_.size(), 0.0);
    BinomialCache cache;
    for (std::size_t t = mdp_->horizon(); t-- > 0;) {
      const auto& layer = layers_[t];
      if (t + 1 == mdp_->horizon() || options_.workers <= 1) {
        for (std::size_t id : layer) value[id] = node_value(nodes_[id], value, m, cache);
      } else {
        parallel_for(layer.size(), options_.workers, [&](std::size_t i) {
          BinomialCache local;
          value[layer[i]] = node_value(nodes_[layer[i]], value, m, local);
        });
      }
    }
    return std::min(1.0, value[node_of_[0][mdp_->start_state()]]);
  }

 private:
  static constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();

  struct Node {
    std::size_t t = 0;
    StateIndex s = 0;
    std::vector<std::uint8_t> optimal;
    std::vector<ReturnDistStats> stats;
  };

  using BinomialCache = std::map<std::uint64_t, std::shared_ptr<detail::BinomialCdf>>;

  double child_value(const Node& node, ActionIndex a, const std::vector<double>& value) const {
    if (!node.optimal[a]) return 1.0;
    if (node.t + 1 >= mdp_->horizon()) return 0.0;
    return value[node_of_[node.t + 1][mdp_->next(node.s, a)]];
  }

  ChoiceProbBounds cached_binomial(const Node& node, std::size_t m, double c,
                                   BinomialCache& cache) const {
    std::vector<const detail::BinomialCdf*> cdf;
    for (const auto& st : node.stats) {
      const double p = c == 0.0 ? 0.0 : std::clamp(st.mean / c, 0.0, 1.0);
      std::uint64_t key = 0;
      std::memcpy(&key, &p, sizeof key);
      auto it = cache.find(key);
      if (it == cache.end()) {
        it = cache.emplace(key, std::make_shared<detail::BinomialCdf>(m, p)).first;
      }
      cdf.push_back(it->second.get());
    }
    return detail::binomial_bounds_from(cdf, options_.partition);
  }

  double node_value(const Node& node, const std::vector<double>& value, double m,
                    BinomialCache& cache) const {
    std::vector<double> coeff(sequences_);
    for (std::size_t j = 0; j < sequences_; ++j) {
      coeff[j] = child_value(node, j / per_first_action_, value);
    }
    const auto [lo, hi] = std::minmax_element(coeff.begin(), coeff.end());
    if (*lo == *hi) return *lo;
    double best = 1.0;
    std::vector<BoundMethod> methods = options_.methods;
    std::sort(methods.begin(), methods.end());
    for (BoundMethod method : methods) {
      if (method_unavailable(node.stats, m, k_, method)) continue;
      ChoiceProbBounds bounds;
      if (method == BoundMethod::binomial) {
        bounds = cached_binomial(node, static_cast<std::size_t>(m), *common_two_point(node.stats),
                                 cache);
      } else {
        bounds = choice_prob_bounds(node.stats, m, method, k_, options_.partition);
      }
      const double v = aggregate_failure_lp(coeff, bounds).value;
      if (v < best) best = v;
      if (best <= 0.0) break;
    }
    return best;
  }

  const TabularMdp* mdp_;
  std::size_t k_;
  TightOptions options_;
  std::size_t sequences_ = 1;
  std::size_t per_first_action_ = 1;
  std::vector<Node> nodes_;
  std::vector<std::vector<std::size_t>> layers_;
  std::vector<std::vector<std::size_t>> node_of_;
};

inline double failure_probability(const TabularMdp& mdp, const Policy& expl, std::size_t k,
                                  double m, const TightOptions& options = {}) {
  if (m < 1.0) throw PreconditionError("failure probability needs m >= 1");
  return FailureModel(mdp, expl, k, options).failure_probability(m);
}

struct TightK {
  std::size_t k = 0;
  bool converged = false;       // some m <= 10^max_log10_m drives the failure bound below 1/2
  double log10_m = std::numeric_limits<double>::infinity();
  double effective = std::numeric_limits<double>::infinity();  // k + log_A m
  double failure_at_m = 1.0;
  std::size_t evaluations = 0;
};

struct TightResult {
  bool found = false;
  std::size_t k = 0;
  double log10_m = std::numeric_limits<double>::infinity();
  double effective = std::numeric_limits<double>::infinity();
  double log10_timesteps = std::numeric_limits<double>::infinity();  // T^2 A^H
  std::vector<TightK> per_k;
};

/// Smallest m with failure bound below 1/2, to the requested relative
/// precision (integer steps below 10^6).
inline TightK tight_for_k(const FailureModel& model) {
  const TabularMdp& mdp = model.mdp();
  const TightOptions& opt = model.options();
  TightK out;
  out.k = model.k();
  const double log_a = std::log10(static_cast<double>(mdp.num_actions()));
  const auto finish = [&](double log10_m, double failure) {
    out.converged = true;
    out.log10_m = log10_m;
    out.failure_at_m = failure;
    out.effective = static_cast<double>(model.k()) + (log_a > 0.0 ? log10_m / log_a : 0.0);
    return out;
  };
  const auto eval = [&](double log10_m) {
    ++out.evaluations;
    const double m = std::pow(10.0, log10_m);
    return model.failure_probability(log10_m <= 6.0 + 1e-9 ? std::round(m) : m);
  };
  if (mdp.num_actions() == 1) return finish(0.0, 0.0);
  const double f1 = eval(0.0);
  if (f1 < 0.5) return finish(0.0, f1);
  const double f_max = eval(opt.max_log10_m);
  if (f_max >= 0.5) {
    out.failure_at_m = f_max;
    return out;
  }
  // Decade scan for the first success, then bisection in log space.
  double lo = 0.0;
  double hi = opt.max_log10_m;
  double f_hi = f_max;
  for (double lg = 1.0; lg < opt.max_log10_m; lg += 1.0) {
    const double f = eval(lg);
    if (f < 0.5) {
      hi = lg;
      f_hi = f;
      break;
    }
    lo = lg;
  }
  // Below 10^6 the search runs over integers; above it, over log10(m).
  const double precision = std::log10(1.0 + opt.relative_precision);
  for (;;) {
    double mid;
    if (hi <= 6.0) {
      const double m_lo = std::round(std::pow(10.0, lo));
      const double m_hi = std::round(std::pow(10.0, hi));
      if (m_hi - m_lo <= 1.0 || m_hi <= m_lo * (1.0 + opt.relative_precision)) break;
      double m_mid = std::floor(std::sqrt(m_lo * m_hi));
      if (m_mid <= m_lo) m_mid = m_lo + 1.0;
      if (m_mid >= m_hi) break;
      mid = std::log10(m_mid);
    } else {
      if (hi - lo <= precision) break;
      mid = 0.5 * (lo + hi);
    }
    const double f = eval(mid);
    if (f < 0.5) {
      hi = mid;
      f_hi = f;
    } else {
      lo = mid;
    }
  }
  return finish(hi, f_hi);
}

inline TightResult tight_effective_horizon(const TabularMdp& mdp, const Policy& expl,
                                           const std::vector<std::size_t>& k_range,
                                           const TightOptions& options = {}) {
  if (k_range.empty()) throw PreconditionError("k range must not be empty");
  TightResult out;
  for (std::size_t k : k_range) {
    if (!sequence_count(mdp.num_actions(), k, options.max_sequences)) continue;
    const FailureModel model(mdp, expl, k, options);
    const TightK r = tight_for_k(model);
    out.per_k.push_back(r);
    if (r.converged && r.effective < out.effective) {
      out.found = true;
      out.k = r.k;
      out.log10_m = r.log10_m;
      out.effective = r.effective;
    }
  }
  if (out.found) {
    out.log10_timesteps = 2.0 * std::log10(static_cast<double>(mdp.horizon())) +
                          out.effective * std::log10(static_cast<double>(mdp.num_actions()));
  }
  return out;
}

}  // namespace horizon
