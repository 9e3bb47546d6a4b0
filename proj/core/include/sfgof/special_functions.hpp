#pragma once

// Special functions behind the closed-form test statistics.

#include <array>

namespace sfgof::special {

double std_normal_cdf(double x);

/// log Phi(x), accurate deep in the left tail.
double log_std_normal_cdf(double x);

/// Scaled complementary error function exp(x^2) erfc(x). Returns +inf when
/// the result overflows (x below about -26.6).
double erfcx(double x);

/// log Gamma(x) for x > 0.
double ln_gamma(double x);

/// e^{-z} 1F1(a; b; z) evaluated without forming either factor. Real z of
/// any sign; b must not be a non-positive integer.
class ScaledKummer {
 public:
  ScaledKummer(double a, double b);
  double operator()(double z) const;

 private:
  double series(double w) const;
  double asymptotic(double w) const;

  double a_;
  double b_;
  bool terminating_;
  int degree_ = 0;
  double asymptotic_prefactor_ = 0.0;
};

double kummer_1f1_scaled(double a, double b, double z);

/// Kummer's confluent hypergeometric function 1F1(a; b; z). Throws
/// OverflowError when the value is not representable.
double kummer_1f1(double a, double b, double z);

/// int_0^inf t^k e^{t x} e^{-gamma t^2} dt for k = 0..4, all at once.
/// Throws OverflowError when x^2 / (4 gamma) is too large for x > 0.
std::array<double, 5> exp_weight_integrals(double x, double gamma);
double exp_weight_integral(int k, double x, double gamma);

/// Parameters of the Gaussian-weighted Fourier integrals I and J.
struct WeightedIntegralQuery {
  double nu;
  double gamma;
  double z;
};

/// I_{nu,gamma}(z) = int_0^inf t^nu cos(t z) e^{-gamma t^2} dt, nu > -1.
class CosineIntegral {
 public:
  CosineIntegral(double nu, double gamma);
  double operator()(double z) const;
  double nu() const noexcept { return nu_; }

 private:
  double nu_;
  double gamma_;
  double prefactor_;
  ScaledKummer kummer_;
};

/// J_{nu,gamma}(z) = int_0^inf t^nu sin(t z) e^{-gamma t^2} dt, nu > -2.
class SineIntegral {
 public:
  SineIntegral(double nu, double gamma);
  double operator()(double z) const;
  double nu() const noexcept { return nu_; }

 private:
  double nu_;
  double gamma_;
  double prefactor_;
  ScaledKummer kummer_;
};

double integral_i(double nu, double gamma, double z);
double integral_j(double nu, double gamma, double z);
double integral_i(const WeightedIntegralQuery& q);
double integral_j(const WeightedIntegralQuery& q);

}  // namespace sfgof::special
