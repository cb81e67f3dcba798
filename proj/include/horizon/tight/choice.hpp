#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

#include "horizon/errors.hpp"
#include "horizon/qtable.hpp"
#include "horizon/tight/stats.hpp"

namespace horizon {

/// Ordered by preference when two methods give the same failure bound.
enum class BoundMethod { bennett, bernstein, berry_esseen, binomial };

inline std::string_view method_name(BoundMethod m) {
  switch (m) {
    case BoundMethod::bennett: return "bennett";
    case BoundMethod::bernstein: return "bernstein";
    case BoundMethod::berry_esseen: return "berry-esseen";
    case BoundMethod::binomial: return "binomial";
  }
  return "?";
}

struct ChoiceProbBounds {
  std::vector<double> p_lo;
  std::vector<double> p_hi;
  BoundMethod method = BoundMethod::bennett;
};

inline constexpr std::size_t kBinomialMaxRollouts = 1'000'000;
inline constexpr std::size_t kBinomialExactRollouts = 10'000;
inline constexpr std::size_t kCltMaxSequences = 100;

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Two-sided envelope on the CDF of a mean of m i.i.d. returns, derived
/// from either the Berry-Esseen or the Bernstein inequality. Point masses
/// use their exact step CDF.
class MeanCdfEnvelope {
 public:
  MeanCdfEnvelope(const ReturnDistStats& st, double m, BoundMethod method)
      : mean_(st.mean), lo_(st.support_lo), hi_(st.support_hi), m_(m), method_(method) {
    exact_ = st.point_mass() || st.variance <= 0.0;
    if (exact_) return;
    variance_ = st.variance;
    range_ = hi_ - lo_;
    if (method_ == BoundMethod::berry_esseen) {
      const double sigma = std::sqrt(variance_);
      // Two upper bounds on E|X - mu|^3 that hold for nonnegative X.
      const double spread = std::max(hi_ - mean_, mean_ - lo_);
      double rho = spread * variance_;
      if (std::isfinite(st.raw_moment3)) rho = std::min(rho, st.raw_moment3);
      const double ratio = rho / (sigma * sigma * sigma);
      eps_ = std::min(0.3328 * (ratio + 0.429), 0.33554 * (ratio + 0.415)) / std::sqrt(m_);
      scale_ = sigma / std::sqrt(m_);
    }
  }

  /// Upper bound on P(mean <= x).
  double upper_le(double x) const {
    if (exact_) return x >= mean_ ? 1.0 : 0.0;
    if (x < lo_) return 0.0;
    if (x >= hi_) return 1.0;
    if (method_ == BoundMethod::berry_esseen) {
      return std::min(1.0, standard_normal_cdf((x - mean_) / scale_) + eps_);
    }
    if (x >= mean_) return 1.0;
    return bernstein_tail(mean_ - x);
  }

  /// Lower bound on P(mean <= x).
  double lower_le(double x) const {
    if (exact_) return x >= mean_ ? 1.0 : 0.0;
    if (x >= hi_) return 1.0;
    if (x < lo_) return 0.0;
    return continuous_lower(x);
  }

  /// Lower bound on P(mean < x).
  double lower_lt(double x) const {
    if (exact_) return x > mean_ ? 1.0 : 0.0;
    if (x > hi_) return 1.0;
    if (x <= lo_) return 0.0;
    return continuous_lower(x);
  }

  /// A point at or below inf{x : P(mean <= x) >= p}.
  double quantile_below(double p) const {
    if (exact_) return mean_;
    if (p <= 0.0 || upper_le(lo_) >= p) return lo_;
    return bisect([&](double x) { return upper_le(x) >= p; }).first;
  }

  /// A point at or above inf{x : P(mean <= x) >= p}.
  double quantile_above(double p) const {
    if (exact_) return mean_;
    if (p <= 0.0) return lo_;
    if (lower_le(lo_) >= p) return lo_;
    return bisect([&](double x) { return lower_le(x) >= p; }).second;
  }

 private:
  double continuous_lower(double x) const {
    if (method_ == BoundMethod::berry_esseen) {
      return std::max(0.0, standard_normal_cdf((x - mean_) / scale_) - eps_);
    }
    if (x <= mean_) return 0.0;
    return 1.0 - bernstein_tail(x - mean_);
  }

  double bernstein_tail(double u) const {
    return std::exp(-m_ * u * u / (2.0 * (variance_ + range_ * u / 3.0)));
  }

  /// Bracket [a, b] around the first x in [lo, hi] where pred turns true.
  template <class Pred>
  std::pair<double, double> bisect(Pred pred) const {
    double a = lo_;
    double b = hi_;
    const double tol = 1e-12 * std::max(1.0, std::max(std::abs(lo_), std::abs(hi_)));
    while (b - a > tol) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (pred(mid)) {
        b = mid;
      } else {
        a = mid;
      }
    }
    return {a, b};
  }

  double mean_;
  double lo_;
  double hi_;
  double m_;
  BoundMethod method_;
  bool exact_ = false;
  double variance_ = 0.0;
  double range_ = 0.0;
  double eps_ = 0.0;
  double scale_ = 1.0;
};

namespace detail {

inline double product_except(const std::vector<double>& factors, std::size_t skip) {
  double prod = 1.0;
  for (std::size_t j = 0; j < factors.size(); ++j) {
    if (j != skip) prod *= factors[j];
  }
  return prod;
}

inline ChoiceProbBounds clt_style_bounds(const std::vector<ReturnDistStats>& stats, double m,
                                         BoundMethod method, std::size_t partition) {
  const std::size_t n = stats.size();
  std::vector<MeanCdfEnvelope> env;
  env.reserve(n);
  for (const auto& st : stats) env.emplace_back(st, m, method);
  ChoiceProbBounds out;
  out.method = method;
  out.p_lo.assign(n, 0.0);
  out.p_hi.assign(n, 0.0);
  std::vector<double> factors(n);
  for (std::size_t a = 0; a < n; ++a) {
    double lo_sum = 0.0;
    double hi_sum = 0.0;
    for (std::size_t i = 1; i <= partition; ++i) {
      const double z = env[a].quantile_below(static_cast<double>(i - 1) / partition);
      for (std::size_t j = 0; j < n; ++j) factors[j] = j == a ? 1.0 : env[j].lower_lt(z);
      lo_sum += product_except(factors, a);
      const double w = env[a].quantile_above(static_cast<double>(i) / partition);
      for (std::size_t j = 0; j < n; ++j) factors[j] = j == a ? 1.0 : env[j].upper_le(w);
      hi_sum += product_except(factors, a);
    }
    out.p_lo[a] = std::clamp(lo_sum / partition, 0.0, 1.0);
    out.p_hi[a] = std::clamp(hi_sum / partition, 0.0, 1.0);
  }
  return out;
}

/// CDF of Binomial(m, p) on the integers, either as an explicit table or
/// through the incomplete beta function for large m.
class BinomialCdf {
 public:
  BinomialCdf(std::size_t m, double p) : m_(m), p_(std::clamp(p, 0.0, 1.0)) {
    if (m_ <= kBinomialExactRollouts) {
      table_.resize(m_ + 1);
      if (p_ <= 0.0 || p_ >= 1.0) {
        for (std::size_t j = 0; j <= m_; ++j) table_[j] = (p_ <= 0.0 || j == m_) ? 1.0 : 0.0;
        return;
      }
      const double lp = std::log(p_);
      const double lq = std::log1p(-p_);
      const double lm = std::lgamma(static_cast<double>(m_) + 1.0);
      double acc = 0.0;
      for (std::size_t j = 0; j <= m_; ++j) {
        const double jj = static_cast<double>(j);
        acc += std::exp(lm - std::lgamma(jj + 1.0) - std::lgamma(static_cast<double>(m_) - jj + 1.0) +
                        jj * lp + (static_cast<double>(m_) - jj) * lq);
        table_[j] = std::min(1.0, acc);
      }
      table_[m_] = 1.0;
    }
  }

  /// P(J <= x) for real x.
  double operator()(double x) const {
    if (x < 0.0) return 0.0;
    if (x >= static_cast<double>(m_)) return 1.0;
    const auto j = static_cast<std::size_t>(std::floor(x));
    if (!table_.empty()) return table_[j];
    if (p_ <= 0.0) return 1.0;
    if (p_ >= 1.0) return 0.0;
    boost::math::binomial_distribution<double> dist(static_cast<double>(m_), p_);
    return boost::math::cdf(dist, static_cast<double>(j));
  }

  /// Smallest count j with P(J <= j) >= level (exact table), or its normal
  /// approximation when m is large.
  double quantile(double level) const {
    if (!table_.empty()) {
      const auto it = std::lower_bound(table_.begin(), table_.end(), level);
      return static_cast<double>(it == table_.end() ? m_ : it - table_.begin());
    }
    const double mean = static_cast<double>(m_) * p_;
    const double sd = std::sqrt(static_cast<double>(m_) * p_ * (1.0 - p_));
    if (sd <= 0.0) return mean;
    const boost::math::normal_distribution<double> normal;
    return std::clamp(mean + sd * boost::math::quantile(normal, level), 0.0,
                      static_cast<double>(m_));
  }

 private:
  std::size_t m_;
  double p_;
  std::vector<double> table_;
};

}  // namespace detail

/// Returns the common nonzero value C if every sequence is supported on
/// {0, C}; 0 if all sequences are point masses at zero.
inline std::optional<double> common_two_point(const std::vector<ReturnDistStats>& stats) {
  std::optional<double> common;
  for (const auto& st : stats) {
    if (!st.two_point) return std::nullopt;
    const double c = *st.two_point;
    if (c == 0.0) continue;
    if (common && !ties_with(c, *common)) return std::nullopt;
    if (!common) common = c;
  }
  return common.value_or(0.0);
}

namespace detail {

inline ChoiceProbBounds binomial_bounds_from(const std::vector<const BinomialCdf*>& cdf,
                                             std::size_t partition) {
  const std::size_t n = cdf.size();
  ChoiceProbBounds out;
  out.method = BoundMethod::binomial;
  out.p_lo.assign(n, 0.0);
  out.p_hi.assign(n, 0.0);
  const double neg_inf = -std::numeric_limits<double>::infinity();
  const double pos_inf = std::numeric_limits<double>::infinity();
  const auto cdf_at = [](const BinomialCdf& f, double x) {
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    if (x == std::numeric_limits<double>::infinity()) return 1.0;
    return f(x);
  };
  std::vector<double> edges(partition + 1);
  for (std::size_t a = 0; a < n; ++a) {
    edges[0] = neg_inf;
    edges[partition] = pos_inf;
    for (std::size_t i = 1; i < partition; ++i) {
      edges[i] = cdf[a]->quantile(static_cast<double>(i) / partition);
    }
    double lo_sum = 0.0;
    double hi_sum = 0.0;
    for (std::size_t i = 1; i <= partition; ++i) {
      if (edges[i] == edges[i - 1]) continue;
      const double mass =
          std::max(0.0, cdf_at(*cdf[a], edges[i]) - cdf_at(*cdf[a], edges[i - 1]));
      if (mass <= 0.0) continue;
      double below = 1.0;
      double upto = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == a) continue;
        below *= cdf_at(*cdf[j], edges[i - 1]);
        upto *= cdf_at(*cdf[j], edges[i]);
      }
      lo_sum += mass * below;
      hi_sum += mass * upto;
    }
    out.p_lo[a] = std::clamp(lo_sum, 0.0, 1.0);
    out.p_hi[a] = std::clamp(hi_sum, 0.0, 1.0);
  }
  return out;
}

}  // namespace detail

/// Riemann-sum bounds for returns on {0, C}: each estimate is C/m times a
/// binomial count, so the argmax probabilities reduce to binomial CDFs.
inline ChoiceProbBounds binomial_bounds(const std::vector<ReturnDistStats>& stats, std::size_t m,
                                        double value, std::size_t partition) {
  std::vector<detail::BinomialCdf> cdf;
  cdf.reserve(stats.size());
  for (const auto& st : stats) cdf.emplace_back(m, value == 0.0 ? 0.0 : st.mean / value);
  std::vector<const detail::BinomialCdf*> ptrs;
  for (const auto& c : cdf) ptrs.push_back(&c);
  return detail::binomial_bounds_from(ptrs, partition);
}

/// Bennett's bound on P(mean - mu >= u) for returns within a range of `range`.
inline double bennett_tail(double variance, double range, double m, double u) {
  if (u <= 0.0) return 1.0;
  if (variance <= 0.0 || range <= 0.0) return 0.0;
  const double x = range * u / variance;
  const double h = x < 1e-4 ? x * x / 2.0 - x * x * x / 6.0
                            : (1.0 + x) * std::log1p(x) - x;
  return std::exp(-(m * variance / (range * range)) * h);
}

inline ChoiceProbBounds bennett_bounds(const std::vector<ReturnDistStats>& stats, double m) {
  const std::size_t n = stats.size();
  ChoiceProbBounds out;
  out.method = BoundMethod::bennett;
  out.p_lo.assign(n, 0.0);
  out.p_hi.assign(n, 1.0);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& st : stats) best = std::max(best, st.mean);
  double second = -std::numeric_limits<double>::infinity();
  for (const auto& st : stats) {
    if (!ties_with(st.mean, best)) second = std::max(second, st.mean);
  }
  if (std::isinf(second)) return out;
  const double u = 0.5 * (best + second);
  // Upper bound on P(every best sequence's estimate falls below u).
  double all_best_low = 1.0;
  for (const auto& st : stats) {
    if (ties_with(st.mean, best)) {
      all_best_low *= bennett_tail(st.variance, st.support_hi - st.support_lo, m, st.mean - u);
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    const auto& st = stats[a];
    if (ties_with(st.mean, best)) continue;
    const double reaches_u = bennett_tail(st.variance, st.support_hi - st.support_lo, m, u - st.mean);
    out.p_hi[a] = std::clamp(1.0 - (1.0 - reaches_u) * (1.0 - all_best_low), 0.0, 1.0);
  }
  return out;
}

/// Why `method` cannot be used on these statistics, or nullopt if it can.
inline std::optional<std::string> method_unavailable(const std::vector<ReturnDistStats>& stats,
                                                     double m, std::size_t k,
                                                     BoundMethod method) {
  switch (method) {
    case BoundMethod::bennett:
      return std::nullopt;
    case BoundMethod::bernstein:
      if (stats.size() > kCltMaxSequences) return "bernstein needs A^k <= 100";
      return std::nullopt;
    case BoundMethod::berry_esseen:
      if (stats.size() > kCltMaxSequences) return "berry-esseen needs A^k <= 100";
      for (const auto& st : stats) {
        if (st.support_lo < 0.0) return "berry-esseen needs nonnegative returns";
      }
      return std::nullopt;
    case BoundMethod::binomial:
      if (k != 1) return "binomial needs k = 1";
      if (m > static_cast<double>(kBinomialMaxRollouts)) return "binomial needs m <= 10^6";
      if (m != std::floor(m)) return "binomial needs an integer m";
      if (!common_two_point(stats)) return "binomial needs every return on {0, C} with common C";
      return std::nullopt;
  }
  return "unknown method";
}

/// Per-sequence bounds on the probability of being the m-sample argmax.
inline ChoiceProbBounds choice_prob_bounds(const std::vector<ReturnDistStats>& stats, double m,
                                           BoundMethod method, std::size_t k = 1,
                                           std::size_t partition = 100) {
  if (m < 1.0) throw PreconditionError("choice bounds need m >= 1");
  if (partition < 1) throw PreconditionError("partition count must be positive");
  if (auto why = method_unavailable(stats, m, k, method)) throw PreconditionError(*why);
  switch (method) {
    case BoundMethod::bennett:
      return bennett_bounds(stats, m);
    case BoundMethod::bernstein:
    case BoundMethod::berry_esseen:
      return detail::clt_style_bounds(stats, m, method, partition);
    case BoundMethod::binomial:
      return binomial_bounds(stats, static_cast<std::size_t>(m), *common_two_point(stats),
                             partition);
  }
  return {};
}

}  // namespace horizon
