#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sfgof/error.hpp"
#include "sfgof/special_functions.hpp"

namespace sfgof {
namespace {

using special::erfcx;
using testing::relative_error;

TEST(Erfcx, MatchesScaledErfcAcrossRange) {
  for (double x = -20.0; x <= 9.0; x += 0.37) {
    const double want = std::exp(x * x) * boost::math::erfc(x);
    EXPECT_LT(relative_error(erfcx(x), want), 1e-13) << x;
  }
}

TEST(Erfcx, ContinuedFractionAgreesWithAsymptoticSeries) {
  for (double x : {30.0, 40.0, 1e3, 1e6}) {
    // 1/(x sqrt(pi)) (1 - 1/(2x^2) + 3/(4x^4) - 15/(8x^6))
    const double u = 1.0 / (x * x);
    const double want = (1.0 - 0.5 * u + 0.75 * u * u - 1.875 * u * u * u) / (x * std::sqrt(std::numbers::pi));
    EXPECT_LT(relative_error(erfcx(x), want), 1e-9) << x;
  }
}

TEST(Erfcx, OverflowsToInfinityFarLeft) { EXPECT_TRUE(std::isinf(erfcx(-30.0))); }

TEST(LogNormalCdf, DeepLeftTail) {
  // log Phi(x) ~ -x^2/2 - log(-x sqrt(2 pi)) for x -> -inf
  const double x = -40.0;
  const double want = -0.5 * x * x - std::log(-x * std::sqrt(2.0 * std::numbers::pi)) - 1.0 / (x * x);
  EXPECT_NEAR(special::log_std_normal_cdf(x), want, 1e-5);
  EXPECT_NEAR(special::log_std_normal_cdf(0.5), std::log(testing::phi_cdf(0.5)), 1e-15);
}

TEST(Kummer, IdentitiesHoldExactly) {
  for (double z : {-30.0, -2.5, 0.0, 0.7, 12.0, 80.0, 300.0}) {
    EXPECT_NEAR(special::kummer_1f1_scaled(0.0, 1.7, z), std::exp(-z), 1e-12 * std::exp(-z) + 1e-300) << z;
    EXPECT_LT(relative_error(special::kummer_1f1_scaled(1.3, 1.3, z), 1.0), 1e-12) << z;
  }
  EXPECT_EQ(special::kummer_1f1(0.0, 2.0, 5.0), 1.0);
  EXPECT_LT(relative_error(special::kummer_1f1(2.5, 2.5, 3.0), std::exp(3.0)), 1e-12);
}

TEST(Kummer, MatchesBoostHypergeometric) {
  Rng rng(42);
  std::uniform_real_distribution<double> ua(-3.0, 3.0);
  std::uniform_real_distribution<double> ub(0.2, 3.0);
  std::uniform_real_distribution<double> uz(-40.0, 120.0);
  for (int i = 0; i < 300; ++i) {
    const double a = ua(rng);
    const double b = ub(rng);
    const double z = uz(rng);
    const double want = boost::math::hypergeometric_1F1(a, b, z) * std::exp(-z);
    const double got = special::kummer_1f1_scaled(a, b, z);
    // Near a zero of 1F1 compare on the scale of the largest series term.
    const double floor = 1e-13 * std::exp(std::abs(z) - z) + 1e-300;
    EXPECT_LE(std::abs(got - want), 1e-10 * std::abs(want) + floor) << a << ' ' << b << ' ' << z;
  }
}

TEST(Kummer, TerminatingPolynomial) {
  // 1F1(-2; b; z) = 1 - 2z/b + z^2/(b(b+1))
  const double b = 0.5;
  for (double z : {-3.0, 0.5, 4.0}) {
    const double want = 1.0 - 2.0 * z / b + z * z / (b * (b + 1.0));
    EXPECT_LT(relative_error(special::kummer_1f1(-2.0, b, z), want), 1e-14);
  }
}

TEST(Kummer, RejectsNonPositiveIntegerB) {
  EXPECT_THROW(special::kummer_1f1(1.0, -1.0, 0.5), DomainError);
  EXPECT_THROW(special::kummer_1f1(1.0, 1.0, 800.0), OverflowError);
}

TEST(ExpWeightIntegrals, MatchQuadrature) {
  Rng rng(7);
  std::uniform_real_distribution<double> ux(-60.0, 20.0);
  std::uniform_real_distribution<double> ug(0.25, 10.0);
  for (int i = 0; i < 300; ++i) {
    const double x = ux(rng);
    const double g = ug(rng);
    const auto f = special::exp_weight_integrals(x, g);
    const double peak = std::max(0.0, x / (2.0 * g));
    const double upper = peak + 40.0 / std::sqrt(g) + 60.0 / std::abs(x);
    for (int k = 0; k < 5; ++k) {
      const double want = testing::gk([&](double t) { return std::pow(t, k) * std::exp(t * x - g * t * t); },
                                      {0.0, 1.0 / (1.0 + std::abs(x)), peak + 1e-9, peak + 3.0 / std::sqrt(g), upper});
      EXPECT_LT(relative_error(f[static_cast<std::size_t>(k)], want), 1e-7) << k << ' ' << x << ' ' << g;
    }
  }
}

TEST(ExpWeightIntegrals, ZeroArgumentMoments) {
  // F_k(0) = Gamma((k+1)/2) / (2 gamma^{(k+1)/2})
  const double g = 3.0;
  const auto f = special::exp_weight_integrals(0.0, g);
  for (int k = 0; k < 5; ++k) {
    const double want = std::tgamma(0.5 * (k + 1)) / (2.0 * std::pow(g, 0.5 * (k + 1)));
    EXPECT_LT(relative_error(f[static_cast<std::size_t>(k)], want), 1e-14);
  }
}

TEST(ExpWeightIntegrals, OverflowSignalled) {
  EXPECT_THROW(special::exp_weight_integrals(200.0, 1.0), OverflowError);
  EXPECT_NO_THROW(special::exp_weight_integrals(-200.0, 1.0));
}

TEST(WeightedFourierIntegrals, MatchOouraQuadrature) {
  Rng rng(11);
  std::uniform_real_distribution<double> unu(-0.9, 4.0);
  std::uniform_real_distribution<double> ug(0.3, 8.0);
  std::uniform_real_distribution<double> uz(0.2, 12.0);
  for (int i = 0; i < 150; ++i) {
    const double nu = unu(rng);
    const double g = ug(rng);
    const double z = uz(rng);
    boost::math::quadrature::ooura_fourier_cos<double> cos_integrator;
    boost::math::quadrature::ooura_fourier_sin<double> sin_integrator;
    const auto f = [&](double t) { return t <= 0.0 ? 0.0 : std::pow(t, nu) * std::exp(-g * t * t); };
    const auto [want_i, err_i] = cos_integrator.integrate(f, z);
    const auto [want_j, err_j] = sin_integrator.integrate(f, z);
    const double l1 = std::tgamma(0.5 * (nu + 1.0)) / (2.0 * std::pow(g, 0.5 * (nu + 1.0)));
    EXPECT_LE(std::abs(special::integral_i(nu, g, z) - want_i), 1e-7 * std::max(std::abs(want_i), 1e-6 * l1))
        << nu << ' ' << g << ' ' << z;
    EXPECT_LE(std::abs(special::integral_j(nu, g, z) - want_j), 1e-7 * std::max(std::abs(want_j), 1e-6 * l1))
        << nu << ' ' << g << ' ' << z;
  }
}

TEST(WeightedFourierIntegrals, ClosedFormsAtSmallOrders) {
  // I_0 = (1/2) sqrt(pi/g) e^{-z^2/4g};  J_1 = z sqrt(pi) / (4 g^{3/2}) e^{-z^2/4g}
  const double g = 1.7;
  for (double z : {0.0, 0.3, 2.0, 9.0}) {
    const double e = std::exp(-z * z / (4.0 * g));
    EXPECT_LT(relative_error(special::integral_i(0.0, g, z), 0.5 * std::sqrt(std::numbers::pi / g) * e), 1e-13);
    if (z > 0.0) {
      EXPECT_LT(relative_error(special::integral_j(1.0, g, z), z * std::sqrt(std::numbers::pi) / (4.0 * std::pow(g, 1.5)) * e),
                1e-13);
    }
  }
  // J is odd in z, I even.
  EXPECT_DOUBLE_EQ(special::integral_j(0.4, 2.0, -1.3), -special::integral_j(0.4, 2.0, 1.3));
  EXPECT_DOUBLE_EQ(special::integral_i(0.4, 2.0, -1.3), special::integral_i(0.4, 2.0, 1.3));
}

TEST(WeightedFourierIntegrals, DomainsEnforced) {
  EXPECT_THROW(special::CosineIntegral(-1.0, 1.0), DomainError);
  EXPECT_NO_THROW(special::SineIntegral(-1.5, 1.0));
  EXPECT_THROW(special::SineIntegral(-2.0, 1.0), DomainError);
  EXPECT_THROW(special::CosineIntegral(1.0, 0.0), DomainError);
}

}  // namespace
}  // namespace sfgof
