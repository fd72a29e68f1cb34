#include <gtest/gtest.h>

#include <random>

#include "fedscore/metrics.hpp"
#include "oracles.hpp"

using namespace fedscore;

TEST(Normalize, TwoStep) {
  const std::vector<double> s = {0.01, 0.02, 0.97};
  const auto n = normalize_scores(s);
  EXPECT_FALSE(n.degenerate);
  const double mean = (0.0 + 0.01 + 0.96) / 3.0;
  EXPECT_NEAR(n.values[0], 0.0, 1e-15);
  EXPECT_NEAR(n.values[1], 0.01 / mean, 1e-12);
  EXPECT_NEAR(n.values[2], 0.96 / mean, 1e-12);
  EXPECT_NEAR(n.values[1], 0.030927835, 1e-8);
  EXPECT_NEAR(n.values[2], 2.969072165, 1e-8);
}

TEST(Normalize, ConstantIsDegenerate) {
  const auto n = normalize_scores(std::vector<double>{2.0, 2.0, 2.0});
  EXPECT_TRUE(n.degenerate);
  EXPECT_EQ(n.values, (std::vector<double>{0, 0, 0}));
}

TEST(Normalize, IdempotentAndInvariants) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(2 + trial % 10);
    for (auto& x : s) x = d(rng);
    const auto n = normalize_scores(s);
    double mn = n.values[0], mean = 0.0;
    for (double x : n.values) mn = std::min(mn, x), mean += x / static_cast<double>(s.size());
    EXPECT_NEAR(mn, 0.0, 1e-12);
    EXPECT_NEAR(mean, 1.0, 1e-9);
    const auto again = normalize_scores(n.values);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(again.values[i], n.values[i], 1e-12);
  }
}

TEST(L2, Examples) {
  const std::vector<double> a = {0, 0, 3}, b = {1, 1, 1}, c = {5, 5, 8};
  // (1,1,1) normalizes to the degenerate zero vector, not to itself
  EXPECT_NEAR(l2_distance(a, b), 3.0, 1e-12);
  EXPECT_NEAR(l2_distance(a, c), 0.0, 1e-12);
  EXPECT_NEAR(l2_distance(a, std::vector<double>{0.5, 1.0, 1.5}), std::sqrt(1 + 0 + 1), 1e-12);
  EXPECT_THROW(l2_distance(a, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(L2, NormalizedPair) {
  // both vectors already min-0 mean-1
  const std::vector<double> a = {0, 0, 3}, b = {0, 1.5, 1.5};
  EXPECT_NEAR(l2_distance(a, b), std::sqrt(0 + 2.25 + 2.25), 1e-12);
  EXPECT_EQ(l2_distance(a, b), l2_distance(b, a));
  EXPECT_EQ(l2_distance(a, a), 0.0);
}

TEST(Correlation, PerfectAndInverted) {
  const std::vector<double> a = {1, 2, 3, 4, 5}, r = {5, 4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(spearman(a, a).value, 1.0);
  EXPECT_DOUBLE_EQ(kendall(a, a).value, 1.0);
  EXPECT_DOUBLE_EQ(pearson(a, a).value, 1.0);
  EXPECT_DOUBLE_EQ(spearman(a, r).value, -1.0);
  EXPECT_DOUBLE_EQ(kendall(a, r).value, -1.0);
}

TEST(Correlation, FourElementExample) {
  const std::vector<double> a = {1, 2, 3, 4}, b = {1, 3, 2, 4};
  EXPECT_NEAR(spearman(a, b).value, 0.8, 1e-12);
  EXPECT_NEAR(kendall(a, b).value, 2.0 / 3.0, 1e-12);
}

TEST(Correlation, ConstantIsDegenerate) {
  const std::vector<double> a = {1, 2, 3}, c = {4, 4, 4};
  for (auto r : {spearman(a, c), kendall(a, c), pearson(c, a)}) {
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.value, 0.0);
  }
  EXPECT_THROW(spearman(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
}

TEST(Correlation, MatchesNaiveOracles) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> tie(0, 6);
  std::normal_distribution<double> d;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 49);
    std::vector<double> a(n), b(n);
    // half the trials draw from a small alphabet to force ties
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = trial % 2 ? tie(rng) : d(rng);
      b[i] = trial % 2 ? tie(rng) : d(rng);
    }
    const auto k = kendall(a, b);
    if (k.degenerate) continue;
    EXPECT_DOUBLE_EQ(k.value, oracle::kendall_naive(a, b));
    EXPECT_NEAR(spearman(a, b).value,
                oracle::pearson_direct(oracle::ranks_by_count(a), oracle::ranks_by_count(b)), 1e-12);
    EXPECT_NEAR(pearson(a, b).value, oracle::pearson_direct(a, b), 1e-12);
    EXPECT_EQ(average_ranks(a), oracle::ranks_by_count(a));
  }
}

TEST(Correlation, TransformInvariance) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> d;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(10), b(10), a_mono(10), a_aff(10);
    for (std::size_t i = 0; i < 10; ++i) {
      a[i] = d(rng);
      b[i] = d(rng);
      a_mono[i] = std::exp(a[i]);
      a_aff[i] = 3.0 * a[i] + 7.0;
    }
    EXPECT_NEAR(spearman(a_mono, b).value, spearman(a, b).value, 1e-12);
    EXPECT_NEAR(kendall(a_mono, b).value, kendall(a, b).value, 1e-12);
    EXPECT_NEAR(pearson(a_aff, b).value, pearson(a, b).value, 1e-12);
    EXPECT_NEAR(spearman(b, b).value, 1.0, 1e-12);
    EXPECT_NEAR(pearson(b, b).value, 1.0, 1e-12);
  }
}

TEST(Detection, RatesAndTies) {
  auto run = [](std::vector<double> s) { return ScoreVector{Method::kFP, std::move(s), std::nullopt}; };
  std::vector<ScoreVector> runs;
  for (int i = 0; i < 10; ++i) runs.push_back(run(i < 8 ? std::vector<double>{0.1, 0.5, 0.4} : std::vector<double>{0.6, 0.5, 0.4}));
  EXPECT_DOUBLE_EQ(detection_rate(runs, 0), 0.8);
  EXPECT_DOUBLE_EQ(detection_rate(std::vector<ScoreVector>{run({0.0, 1.0})}, 0), 1.0);
  EXPECT_DOUBLE_EQ(detection_rate(std::vector<ScoreVector>{run({1.0, 0.0})}, 0), 0.0);
  // tie at the minimum goes to the lowest index
  EXPECT_DOUBLE_EQ(detection_rate(std::vector<ScoreVector>{run({0.0, 0.0})}, 0), 1.0);
  EXPECT_DOUBLE_EQ(detection_rate(std::vector<ScoreVector>{run({0.0, 0.0})}, 1), 0.0);
  EXPECT_EQ(argmin(std::vector<double>{3, 1, 1}), 1u);
  EXPECT_THROW(detection_rate(std::vector<ScoreVector>{}, 0), std::invalid_argument);
}

TEST(Summary, SampleVariance) {
  const auto s = summarize(std::vector<double>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.sample_variance, 5.0 / 3.0);
  EXPECT_EQ(summarize(std::vector<double>{7}).sample_variance, 0.0);
}
