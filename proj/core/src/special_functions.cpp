#include "sfgof/special_functions.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sfgof/error.hpp"

namespace sfgof::special {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kLogMax = 709.0;

// Above this argument the power series is replaced by the large-w expansion.
constexpr double kAsymptoticThreshold = 60.0;

// Continued fraction erfcx(x) = 1/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
// evaluated by modified Lentz. Used for x >= 10 where it converges in a few dozen steps.
double erfcx_continued_fraction(double x) {
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int m = 1; m < 500; ++m) {
    const double a = 0.5 * m;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 0.5 * kEps) break;
  }
  return 1.0 / (std::sqrt(std::numbers::pi) * f);
}

bool is_nonpositive_integer(double a) { return a <= 0.0 && a == std::floor(a); }

}  // namespace

double std_normal_cdf(double x) {
  if (std::isnan(x)) return x;
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double log_std_normal_cdf(double x) {
  if (x < -5.0) {
    const double z = -x / std::numbers::sqrt2;
    return std::log(0.5 * erfcx(z)) - z * z;
  }
  return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
}

double erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) {
    const double x2 = x * x;
    if (x2 > kLogMax) return std::numeric_limits<double>::infinity();
    const double err = std::fma(x, x, -x2);
    return 2.0 * std::exp(x2) * (1.0 + err) - erfcx(-x);
  }
  if (x < 10.0) {
    // x*x is split into its rounded value and the exact rounding error.
    const double x2 = x * x;
    const double err = std::fma(x, x, -x2);
    return std::exp(x2) * (1.0 + err) * std::erfc(x);
  }
  return erfcx_continued_fraction(x);
}

double ln_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("ln_gamma requires x > 0, got " + std::to_string(x));
  if (std::isinf(x)) return x;
  return boost::math::lgamma(x);
}

ScaledKummer::ScaledKummer(double a, double b) : a_(a), b_(b), terminating_(is_nonpositive_integer(a)) {
  if (is_nonpositive_integer(b)) throw DomainError("1F1 undefined for non-positive integer b");
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("1F1 parameters must be finite");
  if (terminating_) {
    degree_ = static_cast<int>(-a);
  } else {
    // Gamma(b) / Gamma(a), sign-aware.
    int sign_a = 1;
    int sign_b = 1;
    const double lg_a = boost::math::lgamma(a, &sign_a);
    const double lg_b = boost::math::lgamma(b, &sign_b);
    asymptotic_prefactor_ = sign_a * sign_b * std::exp(lg_b - lg_a);
  }
}

double ScaledKummer::operator()(double z) const {
  if (std::isnan(z)) return z;
  if (z < 0.0) {
    // e^{-z} 1F1(a;b;z) = 1F1(b-a;b;-z) = e^{|z|} * [e^{-|z|} 1F1(b-a;b;|z|)], i.e.
    // e^{-z}M(a,b,z) with z<0 equals M(b-a,b,|z|), which we obtain from the scaled form.
    const double w = -z;
    const double scaled = ScaledKummer(b_ - a_, b_)(w);
    if (scaled == 0.0) return 0.0;
    const double log_value = w + std::log(std::abs(scaled));
    if (log_value > kLogMax) throw OverflowError("1F1 result overflows");
    return std::copysign(std::exp(log_value), scaled);
  }
  if (terminating_) {
    double term = 1.0;
    double sum = 1.0;
    for (int s = 0; s < degree_; ++s) {
      term *= (a_ + s) / (b_ + s) * z / (s + 1);
      sum += term;
    }
    return sum * std::exp(-z);
  }
  if (z > kAsymptoticThreshold) {
    // Recessive term relative size |Gamma(a)/Gamma(b-a)| z^{b-2a} e^{-z}; fall back to the
    // scaled series if it is not negligible.
    int sign = 1;
    const double log_ratio = boost::math::lgamma(a_, &sign) -
                             (is_nonpositive_integer(b_ - a_) ? -1e300 : boost::math::lgamma(b_ - a_, &sign));
    const double log_recessive = log_ratio + (b_ - 2.0 * a_) * std::log(z) - z;
    if (log_recessive < std::log(kEps) - 2.0) return asymptotic(z);
  }
  return series(z);
}

double ScaledKummer::series(double w) const {
  // Power series with running rescaling so that the e^{w} growth never overflows.
  double term = 1.0;
  double sum = 1.0;
  double compensation = 0.0;
  double log_scale = 0.0;
  for (int s = 0; s < 100000; ++s) {
    term *= (a_ + s) / (b_ + s) * w / (s + 1);
    const double y = term - compensation;
    const double t = sum + y;
    compensation = (t - sum) - y;
    sum = t;
    if (std::abs(sum) > 1e280) {
      sum *= 1e-280;
      term *= 1e-280;
      compensation *= 1e-280;
      log_scale += 280.0 * std::numbers::ln10;
    }
    if (s > w && std::abs(term) <= 0.25 * kEps * std::abs(sum)) break;
  }
  if (sum == 0.0) return 0.0;
  const double log_value = log_scale - w + std::log(std::abs(sum));
  return std::copysign(std::exp(log_value), sum);
}

double ScaledKummer::asymptotic(double w) const {
  // e^{-w} 1F1(a;b;w) ~ Gamma(b)/Gamma(a) w^{a-b} sum_s (b-a)_s (1-a)_s / (s! w^s)
  double term = 1.0;
  double sum = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 500; ++s) {
    const double next = term * (b_ - a_ + s) * (1.0 - a_ + s) / ((s + 1) * w);
    if (std::abs(next) >= previous) break;  // divergent tail
    previous = std::abs(next);
    term = next;
    sum += term;
    if (std::abs(term) <= 0.25 * kEps * std::abs(sum)) break;
  }
  return asymptotic_prefactor_ * std::pow(w, a_ - b_) * sum;
}

double kummer_1f1_scaled(double a, double b, double z) { return ScaledKummer(a, b)(z); }

double kummer_1f1(double a, double b, double z) {
  if (a == 0.0) return 1.0;
  if (z == 0.0) return 1.0;
  const double scaled = ScaledKummer(a, b)(z);
  if (scaled == 0.0) return 0.0;
  const double log_value = z + std::log(std::abs(scaled));
  if (log_value > kLogMax) throw OverflowError("1F1 result overflows double precision");
  return std::copysign(std::exp(log_value), scaled);
}

std::array<double, 5> exp_weight_integrals(double x, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("exp-weight integral requires gamma > 0");
  if (!std::isfinite(x)) throw DomainError("exp-weight integral requires finite x");
  // Substituting t = u / s with s = sqrt(2 gamma) gives
  //   F_k(x) = s^{-(k+1)} H_k(y),  H_k(y) = int_0^inf u^k e^{-y u - u^2/2} du,  y = -x / s,
  // with H_0 = sqrt(pi/2) erfcx(y / sqrt 2), H_1 = 1 - y H_0 and
  //   H_k = (k-1) H_{k-2} - y H_{k-1}.
  // The recurrence loses accuracy forward for large positive y; there H_k is the
  // minimal solution and is obtained by Miller's backward recurrence.
  const double s = std::sqrt(2.0 * gamma);
  const double y = -x / s;
  if (y < 0.0 && 0.5 * y * y > kLogMax - 5.0) {
    throw OverflowError("exp-weight integral overflows: x^2/(4 gamma) = " + std::to_string(0.5 * y * y));
  }
  const double h0 = std::sqrt(0.5 * std::numbers::pi) * erfcx(y / std::numbers::sqrt2);
  std::array<double, 5> h{};
  if (y <= 2.0) {
    h[0] = h0;
    h[1] = 1.0 - y * h0;
    for (int k = 2; k < 5; ++k) h[k] = (k - 1) * h[k - 2] - y * h[k - 1];
  } else {
    const int top = std::max(30, static_cast<int>(std::ceil(640.0 / (y * y))));
    double upper = 0.0;  // H_{k}
    double lower = 1.0;  // H_{k-1}, arbitrary normalization
    // Walk H_{k-2} = (H_k + y H_{k-1}) / (k-1) from k = top + 1 down to k = 2.
    if (top - 0 <= 4) h[top] = lower;
    for (int k = top + 1; k >= 2; --k) {
      const double next = (upper + y * lower) / (k - 1);
      upper = lower;
      lower = next;
      if (k - 2 <= 4) {
        h[k - 2] = next;
        if (k - 1 <= 4) h[k - 1] = upper;
      } else if (std::abs(lower) > 1e200) {
        upper *= 1e-200;
        lower *= 1e-200;
      }
    }
    const double scale = h0 / h[0];
    for (auto& v : h) v *= scale;
  }
  std::array<double, 5> f{};
  double inv_pow = 1.0 / s;
  for (int k = 0; k < 5; ++k) {
    f[k] = h[k] * inv_pow;
    inv_pow /= s;
  }
  return f;
}

double exp_weight_integral(int k, double x, double gamma) {
  if (k < 0 || k > 4) throw DomainError("exp-weight integral order must be in 0..4");
  return exp_weight_integrals(x, gamma)[static_cast<std::size_t>(k)];
}

CosineIntegral::CosineIntegral(double nu, double gamma)
    : nu_(nu), gamma_(gamma), prefactor_(0.0), kummer_(-0.5 * nu, 0.5) {
  if (!(nu > -1.0)) throw DomainError("I integral requires nu > -1, got " + std::to_string(nu));
  if (!(gamma > 0.0)) throw DomainError("I integral requires gamma > 0");
  const double half = 0.5 * (nu + 1.0);
  prefactor_ = 0.5 * std::exp(boost::math::lgamma(half) - half * std::log(gamma));
}

double CosineIntegral::operator()(double z) const {
  return prefactor_ * kummer_(z * z / (4.0 * gamma_));
}

SineIntegral::SineIntegral(double nu, double gamma)
    : nu_(nu), gamma_(gamma), prefactor_(0.0), kummer_(0.5 * (1.0 - nu), 1.5) {
  if (!(nu > -2.0)) throw DomainError("J integral requires nu > -2, got " + std::to_string(nu));
  if (!(gamma > 0.0)) throw DomainError("J integral requires gamma > 0");
  const double half = 1.0 + 0.5 * nu;
  prefactor_ = 0.5 * std::exp(boost::math::lgamma(half) - half * std::log(gamma));
}

double SineIntegral::operator()(double z) const {
  if (z == 0.0) return 0.0;
  return z * prefactor_ * kummer_(z * z / (4.0 * gamma_));
}

double integral_i(double nu, double gamma, double z) { return CosineIntegral(nu, gamma)(z); }
double integral_j(double nu, double gamma, double z) { return SineIntegral(nu, gamma)(z); }
double integral_i(const WeightedIntegralQuery& q) { return integral_i(q.nu, q.gamma, q.z); }
double integral_j(const WeightedIntegralQuery& q) { return integral_j(q.nu, q.gamma, q.z); }

}  // namespace sfgof::special
