#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sfgof/error.hpp"
#include "sfgof/mgf_test.hpp"
#include "sfgof/model.hpp"

namespace sfgof {
namespace {

using mgf::StandardizedResiduals;
using testing::relative_error;

StandardizedResiduals random_residuals(std::size_t n, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> up(0.3, 4.0);
  std::uniform_real_distribution<double> ul(0.05, 2.0);
  StandardizedResiduals res;
  res.r = testing::uniform_vector(n, lo, hi, rng);
  res.p_hat = up(rng);
  res.lambda_hat = ul(rng);
  return res;
}

TEST(MgfStatistic, SingleResidualKnownValue) {
  // r = 0, p = lambda = 1: D(t) = 1 - t - t^2, so
  // T = int (1 - t - t^2)^2 e^{-gamma t^2} dt in terms of the half-Gaussian moments.
  StandardizedResiduals res;
  res.r = {0.0};
  const double g = 2.0;
  auto m = [g](int k) { return std::tgamma(0.5 * (k + 1)) / (2.0 * std::pow(g, 0.5 * (k + 1))); };
  const double want = m(0) - 2.0 * m(1) - m(2) + 2.0 * m(3) + m(4);
  EXPECT_LT(relative_error(mgf::statistic_closed(res, g).statistic, want), 1e-13);
}

TEST(MgfStatistic, ClosedFormMatchesQuadrature) {
  Rng rng(2024);
  for (double g : {0.25, 1.0, 4.0, 8.0}) {
    for (int rep = 0; rep < 10; ++rep) {
      const auto res = random_residuals(20, -4.0, 1.0, rng);
      const double closed = mgf::statistic_closed(res, g).statistic;
      const double quad = mgf::statistic_quadrature(res, g).statistic;
      EXPECT_LT(relative_error(closed, quad), 1e-8) << g;
    }
  }
}

TEST(MgfStatistic, ClosedFormMatchesLiteralPairFormula) {
  // The literal transcription is only stable when r_j + r_k is not very negative.
  Rng rng(5);
  for (double g : {1.0, 4.0}) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto res = random_residuals(8, -0.5, 1.5, rng);
      const double want = testing::mgf_statistic_literal(res.r, res.p_hat, res.lambda_hat, g);
      EXPECT_LT(relative_error(mgf::statistic_closed(res, g).statistic, want), 1e-9);
    }
  }
}

TEST(MgfStatistic, InvariantToResidualOrder) {
  Rng rng(3);
  auto res = random_residuals(30, -3.0, 1.0, rng);
  const double a = mgf::statistic_closed(res, 2.0).statistic;
  std::reverse(res.r.begin(), res.r.end());
  EXPECT_LT(relative_error(mgf::statistic_closed(res, 2.0).statistic, a), 1e-13);
}

TEST(MgfStatistic, RejectsSmallGamma) {
  StandardizedResiduals res;
  res.r = {0.1, -0.4};
  EXPECT_THROW(mgf::statistic_closed(res, 0.2), ConfigError);
  EXPECT_NO_THROW(mgf::statistic_closed(res, mgf::kMinGamma));
  res.p_hat = 0.0;
  EXPECT_THROW(mgf::statistic_closed(res, 1.0), DomainError);
}

TEST(MgfStatistic, ExactModelMomentsGiveNearZeroMomentEquations) {
  // Under the true parameters the empirical moment equations are O(n^{-1/2}).
  const NormalGammaParams truth{0.5, 2.0, 1.5};
  Rng rng(99);
  const auto eps = sample_errors(truth, 200000, rng);
  StandardizedResiduals res;
  for (double e : eps) res.r.push_back(e / truth.c);
  res.p_hat = truth.p;
  res.lambda_hat = truth.lambda();
  const auto m = mgf::moment_equations(res);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_LT(std::abs(m[k]), 0.2 * std::pow(3.0, k)) << k;
}

TEST(MgfStatistic, TaylorRemainderIsFifthOrder) {
  Rng rng(17);
  const auto res = random_residuals(40, -3.0, 1.0, rng);
  double previous = 0.0;
  for (double t = 0.08; t > 0.004; t /= 2.0) {
    const double remainder = std::abs(mgf::d_n(res, t) - mgf::taylor_check(res, t));
    if (previous > 0.0) {
      const double ratio = previous / remainder;
      EXPECT_GT(ratio, 24.0) << t;
      EXPECT_LT(ratio, 40.0) << t;
    }
    previous = remainder;
  }
  EXPECT_THROW(mgf::taylor_check(res, 0.2), DomainError);
}

TEST(MgfStatistic, EmpiricalMgfDerivative) {
  StandardizedResiduals res;
  res.r = {-1.0, 0.5};
  const auto [m, dm] = mgf::empirical_mgf(res, 0.3);
  EXPECT_NEAR(m, 0.5 * (std::exp(-0.3) + std::exp(0.15)), 1e-15);
  EXPECT_NEAR(dm, 0.5 * (-std::exp(-0.3) + 0.5 * std::exp(0.15)), 1e-15);
}

TEST(Moments, StandardizedMomentsMatchMgfDerivatives) {
  // Fifth derivative of the standardized MGF at 0 by finite differences of
  // its log is noisy; compare moments 1..3 to closed cumulants instead.
  const NormalGammaParams q{0.3, 2.5, 1.0};
  const auto mu = standardized_moments(q);
  const double k1 = -q.p;
  const double k2 = q.lambda() + q.p;
  const double k3 = -2.0 * q.p;
  EXPECT_NEAR(mu[0], k1, 1e-13);
  EXPECT_NEAR(mu[1], k2 + k1 * k1, 1e-12);
  EXPECT_NEAR(mu[2], k3 + 3.0 * k2 * k1 + k1 * k1 * k1, 1e-11);
}

}  // namespace
}  // namespace sfgof
