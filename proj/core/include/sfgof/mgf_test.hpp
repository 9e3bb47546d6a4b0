#pragma once

// Goodness-of-fit statistic for the normal/gamma composed error, built on the
// empirical moment generating function of standardized residuals.

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

namespace sfgof::mgf {

/// r_j = eps_j / c_hat together with the fitted (p, lambda, c).
struct StandardizedResiduals {
  std::vector<double> r;
  double p_hat = 1.0;
  double lambda_hat = 1.0;
  double c_hat = 1.0;

  std::size_t n() const noexcept { return r.size(); }
  void validate() const;
};

struct MgfTestOutcome {
  double statistic = 0.0;
  double gamma = 0.0;
  std::size_t n = 0;
};

/// Smallest weight decay accepted by the closed form; smaller values make the
/// pairwise terms numerically fragile.
inline constexpr double kMinGamma = 0.25;

/// (M_n(t), M_n'(t)).
std::pair<double, double> empirical_mgf(const StandardizedResiduals& res, double t);

/// D_n(t) = (1 + t) M_n'(t) + [p - lambda t (1 + t)] M_n(t).
double d_n(const StandardizedResiduals& res, double t);

/// T_{n,gamma} = n int_0^inf D_n(t)^2 exp(-gamma t^2) dt in closed form.
MgfTestOutcome statistic_closed(const StandardizedResiduals& res, double gamma);

/// The same integral by adaptive quadrature.
MgfTestOutcome statistic_quadrature(const StandardizedResiduals& res, double gamma);

/// Empirical moment equations M_{k,n}, k = 1..5.
std::array<double, 5> moment_equations(const StandardizedResiduals& res);

/// Degree-4 Taylor polynomial of D_n at 0, for |t| <= 0.1.
double taylor_check(const StandardizedResiduals& res, double t);

/// The gamma -> infinity limit n (M_{5,n} / 24)^2 of 2 gamma^{9/2} / Gamma(9/2) T_{n,gamma}
/// when the first four moment equations vanish.
double limit_statistic(const StandardizedResiduals& res);

}  // namespace sfgof::mgf
