#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "sfgof/error.hpp"
#include "sfgof/resampling.hpp"

namespace sfgof {
namespace {

TEST(BootstrapPValue, CountsTiesAsExceedances) {
  const std::vector<double> boot{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(rs::bootstrap_p_value(3.0, boot), 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(rs::bootstrap_p_value(10.0, boot), 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(rs::bootstrap_p_value(0.0, boot), 1.0);
}

TEST(BootstrapPValue, RejectsTooFewReplicates) {
  rs::BootstrapConfig config;
  config.B = 50;
  EXPECT_THROW(rs::bootstrap_pvalue(location_sample({0.0, -1.0, -0.4, 0.2, -2.0, -0.1}), config), ConfigError);
}

TEST(BootstrapPValue, DeterministicAcrossWorkers) {
  Rng rng(9);
  const auto sample = location_sample(sample_errors(NormalGammaParams{0.5, 1.0, 1.0}, 80, rng));
  rs::BootstrapConfig config;
  config.B = 99;
  config.seed = 123;
  config.workers = 1;
  const auto one = rs::bootstrap_pvalue(sample, config);
  config.workers = 3;
  const auto three = rs::bootstrap_pvalue(sample, config);
  EXPECT_EQ(one.bootstrap_statistics, three.bootstrap_statistics);
  EXPECT_EQ(one.p_value, three.p_value);
  EXPECT_GT(one.p_value, 0.0);
  EXPECT_LE(one.p_value, 1.0);
}

TEST(Lloyd, UnchangedWhenSizeIsNominal) {
  EXPECT_NEAR(rs::lloyd_correction(0.4, 0.05, 0.05), 0.4, 1e-14);
}

TEST(Lloyd, ShiftsOnTheProbitScale) {
  // size_hat = Phi(-1), level = Phi(-1.5): the probit of power drops by 0.5.
  const double size_hat = testing::phi_cdf(-1.0);
  const double level = testing::phi_cdf(-1.5);
  EXPECT_NEAR(rs::lloyd_correction(testing::phi_cdf(0.3), size_hat, level), testing::phi_cdf(-0.2), 1e-12);
  EXPECT_THROW(rs::lloyd_correction(1.0, 0.05), DomainError);
}

TEST(NormalQuantile, InvertsCdf) {
  for (double p : {1e-10, 0.025, 0.5, 0.9, 1.0 - 1e-9}) {
    EXPECT_NEAR(testing::phi_cdf(rs::std_normal_quantile(p)), p, 1e-12 * std::max(p, 1e-3));
  }
}

TEST(CriticalIndex, OrderStatistic) {
  EXPECT_EQ(rs::critical_index(1000, 0.05), 950u);
  EXPECT_EQ(rs::critical_index(500, 0.05), 475u);
  EXPECT_EQ(rs::critical_index(210, 0.05), 199u);
  EXPECT_THROW(rs::critical_index(10, 1.0), ConfigError);
}

TEST(Summarize, StrictInequalityAgainstCriticalPoint) {
  std::vector<double> boot(200);
  for (std::size_t i = 0; i < boot.size(); ++i) boot[i] = static_cast<double>(i + 1);
  const std::vector<double> stats{190.0, 191.0, 300.0, 1.0};
  const auto rep = rs::summarize(4.0, stats, boot, 0.05);
  EXPECT_EQ(rep.critical_point, 190.0);
  EXPECT_DOUBLE_EQ(rep.rejection_rate, 0.5);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(257);
  rs::parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  try {
    rs::parallel_for(100, 4, [](std::size_t i) {
      if (i == 70 || i == 13 || i == 90) throw std::runtime_error(std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "13");
  }
}

TEST(WarpSpeed, DeterministicAcrossWorkers) {
  rs::WarpSpeedConfig config;
  config.M = 200;
  config.n = 60;
  config.gammas = {2.0, 4.0};
  config.seed = 5;
  config.workers = 1;
  const auto a = rs::warp_speed(config);
  config.workers = 4;
  const auto b = rs::warp_speed(config);
  ASSERT_EQ(a.reports.size(), 2u);
  for (std::size_t g = 0; g < 2; ++g) {
    EXPECT_EQ(a.reports[g].statistic_values, b.reports[g].statistic_values);
    EXPECT_EQ(a.reports[g].bootstrap_values, b.reports[g].bootstrap_values);
    EXPECT_EQ(a.reports[g].rejection_rate, b.reports[g].rejection_rate);
  }
  EXPECT_EQ(a.failures, b.failures);
}

TEST(WarpSpeed, RequiresEnoughReplicationsForLevel) {
  rs::WarpSpeedConfig config;
  config.M = 100;
  EXPECT_THROW(rs::warp_speed(config), ConfigError);
}

TEST(Generators, MixtureAndStudentT) {
  Rng rng(1);
  const rs::Mixture mix{0.7, {1.0, 1.0, 1.0}, {1.0, 3.0, 1.0}};
  const auto a = rs::sample_generator(mix, 50000, rng);
  double mean = 0.0;
  for (double v : a) mean += v;
  EXPECT_NEAR(mean / 50000.0, -(0.7 * 1.0 + 0.3 * 3.0), 0.03);

  const auto b = rs::sample_generator(rs::StudentTGamma{5.0, 3.0, 1.0}, 50000, rng);
  mean = 0.0;
  for (double v : b) mean += v;
  EXPECT_NEAR(mean / 50000.0, -3.0, 0.05);
  EXPECT_THROW(rs::sample_generator(rs::Mixture{1.5, {}, {}}, 1, rng), DomainError);
}

TEST(FitNull, StableNeedsMaximumLikelihood) {
  rs::FitSettings s;
  s.family = Family::stable_gamma;
  s.estimator = rs::Estimator::cols;
  EXPECT_THROW(rs::fit_null(location_sample({0.0, -1.0, -0.3, 0.4, -2.0, -0.5}), s, {1.0}), ConfigError);
  EXPECT_EQ(rs::parse_estimator("mle"), rs::Estimator::mle);
  EXPECT_THROW(rs::parse_estimator("gmm"), ConfigError);
}

}  // namespace
}  // namespace sfgof
