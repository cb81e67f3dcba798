#include <gtest/gtest.h>

#include <cmath>

#include "horizon/metrics.hpp"

using namespace horizon;

namespace {

PairedSeries converged(const std::vector<double>& bound, const std::vector<double>& empirical) {
  PairedSeries s;
  for (std::size_t i = 0; i < bound.size(); ++i) s.push_back({bound[i], empirical[i]});
  return s;
}

}  // namespace

TEST(Spearman, Examples) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(spearman(x, {1, 2, 3, 4, 5}), 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, {5, 4, 3, 2, 1}), -1.0);
  EXPECT_NEAR(spearman(x, {3, 2, 1, 5, 4}), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3}, {1, 3, 2}), 0.5);
}

TEST(Spearman, InvariantUnderMonotoneTransforms) {
  const std::vector<double> x{0.3, 1.7, 2.2, 9.0, 4.1, 5.5};
  const std::vector<double> y{1.0, 3.0, 2.0, 6.0, 4.0, 7.0};
  std::vector<double> x_exp;
  for (double v : x) x_exp.push_back(std::exp(v));
  EXPECT_NEAR(spearman(x, y), spearman(x_exp, y), 1e-12);
  EXPECT_NEAR(spearman(x, y), spearman(y, x), 1e-12);
}

TEST(Spearman, HandlesTiesAndRejectsDegenerateInput) {
  EXPECT_NEAR(spearman({1, 1, 2, 3}, {1, 2, 3, 4}), 0.9486832980505138, 1e-12);
  EXPECT_THROW(spearman({1, 2}, {1, 2}), PreconditionError);
  EXPECT_THROW(spearman({1, 1, 1}, {1, 2, 3}), PreconditionError);
}

TEST(Spearman, SeriesSkipsUnconverged) {
  PairedSeries s = converged({1, 2, 3}, {1, 2, 3});
  s.push_back({0.5, std::nullopt});
  EXPECT_DOUBLE_EQ(spearman(s), 1.0);
}

TEST(MedianRatio, Examples) {
  EXPECT_DOUBLE_EQ(median_ratio(converged({1, 2, 3}, {1, 2, 3})), 1.0);
  EXPECT_NEAR(median_ratio(converged({2, 3, 4}, {1, 2, 3})), 10.0, 1e-12);
  EXPECT_NEAR(median_ratio(converged({0, 1, 2}, {1, 2, 3})), 10.0, 1e-12);
  // Over, under and exact by a factor of 10, 1/10 and 1.
  EXPECT_NEAR(median_ratio(converged({3, 2, 5}, {2, 3, 5})), 10.0, 1e-12);
  const PairedSeries a = converged({3, 2, 5}, {2, 3, 5});
  const PairedSeries swapped = converged({2, 3, 5}, {3, 2, 5});
  EXPECT_DOUBLE_EQ(median_ratio(a), median_ratio(swapped));
  EXPECT_THROW(median_ratio({{1.0, std::nullopt}}), PreconditionError);
}

TEST(Auroc, Examples) {
  PairedSeries separated{{1.0, 1.0}, {2.0, 2.0}, {5.0, std::nullopt}, {6.0, std::nullopt}};
  EXPECT_DOUBLE_EQ(*auroc(separated), 1.0);
  PairedSeries flat{{3.0, 1.0}, {3.0, 2.0}, {3.0, std::nullopt}, {3.0, std::nullopt}};
  EXPECT_DOUBLE_EQ(*auroc(flat), 0.5);
  PairedSeries inverted{{9.0, 1.0}, {1.0, std::nullopt}};
  EXPECT_DOUBLE_EQ(*auroc(inverted), 0.0);
  PairedSeries hand{{1.0, 4.0}, {2.0, 5.0}, {3.0, std::nullopt}, {4.0, std::nullopt}};
  EXPECT_DOUBLE_EQ(*auroc(hand), 1.0);
  EXPECT_FALSE(auroc(converged({1, 2}, {1, 2})).has_value());
}

TEST(Auroc, InvariantUnderMonotoneTransforms) {
  PairedSeries s{{1.0, 1.0}, {4.0, 2.0}, {3.0, std::nullopt}, {6.0, std::nullopt}, {2.5, 3.0}};
  PairedSeries t = s;
  for (auto& p : t) p.bound = 3.0 * p.bound + 7.0;
  EXPECT_DOUBLE_EQ(*auroc(s), *auroc(t));
}

TEST(Accuracy, BestThreshold) {
  PairedSeries separated{{1.0, 1.0}, {2.0, 2.0}, {5.0, std::nullopt}, {6.0, std::nullopt}};
  EXPECT_DOUBLE_EQ(best_threshold_accuracy(separated), 1.0);
  PairedSeries none{{1.0, std::nullopt}, {2.0, std::nullopt}};
  EXPECT_DOUBLE_EQ(best_threshold_accuracy(none), 1.0);
  PairedSeries inverted{{9.0, 1.0}, {1.0, std::nullopt}};
  EXPECT_DOUBLE_EQ(best_threshold_accuracy(inverted), 0.5);
}
