#pragma once

// Composed-error families for stochastic frontier models: eps = v - u with
// two-sided noise v and gamma-distributed inefficiency u >= 0.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstddef>
#include <string_view>
#include <variant>
#include <vector>

#include "sfgof/rng.hpp"

namespace sfgof {

/// v ~ N(0, sigma_v2), u ~ Gamma(shape p, scale c).
struct NormalGammaParams {
  double sigma_v2 = 1.0;
  double p = 1.0;
  double c = 1.0;

  /// sigma_v2 / c^2, the noise scale of eps / c.
  double lambda() const noexcept { return sigma_v2 / (c * c); }
  void validate() const;
};

/// v symmetric alpha-stable with CF exp(-kappa^alpha |t|^alpha), u ~ Gamma(p, c).
/// Only the finite-mean range 1 < alpha <= 2 is supported.
struct StableGammaParams {
  double kappa = 1.0;
  double alpha = 2.0;
  double p = 1.0;
  double c = 1.0;

  /// (kappa / c)^alpha.
  double lambda() const;
  void validate() const;
};

using ErrorParams = std::variant<NormalGammaParams, StableGammaParams>;

enum class Family { normal_gamma, stable_gamma };

Family family_of(const ErrorParams& params) noexcept;
std::string_view to_string(Family family) noexcept;
Family parse_family(std::string_view name);
void validate(const ErrorParams& params);

/// Gamma shape and scale of the inefficiency term, whatever the family.
double inefficiency_shape(const ErrorParams& params) noexcept;
double inefficiency_scale(const ErrorParams& params) noexcept;

enum class SignConvention { production, cost };

/// Y = X beta + eps. Under the cost convention the data are negated on
/// ingestion, so beta keeps its usual cost-function meaning.
struct RegressionModel {
  Eigen::VectorXd beta;
  ErrorParams errors = NormalGammaParams{};
  SignConvention sign = SignConvention::production;
};

/// One cross-section: n x k design matrix and response of length n.
struct Sample {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;

  Eigen::Index n() const noexcept { return x.rows(); }
  Eigen::Index k() const noexcept { return x.cols(); }

  /// Shape checks, n >= k + 1 and numerical full column rank.
  void validate() const;
};

/// Residuals Y - X beta.
Eigen::VectorXd residuals(const Sample& sample, const Eigen::VectorXd& beta);

/// Intercept-only design with response `y`.
Sample location_sample(std::vector<double> y);

/// MGF of eps, exp(sigma_v2 t^2 / 2) / (1 + c t)^p. Requires 1 + c t > 0.
double mgf_composed(const NormalGammaParams& params, double t);

/// MGF of eps / c, exp(lambda t^2 / 2) / (1 + t)^p. Requires 1 + t > 0.
double mgf_standardized(double lambda, double p, double t);

std::complex<double> cf_composed(const NormalGammaParams& params, double t);
std::complex<double> cf_composed(const StableGammaParams& params, double t);
std::complex<double> cf_composed(const ErrorParams& params, double t);

/// Raw moments E[eps^k], k <= 4, and the fifth moment of eps / c.
struct NormalGammaMoments {
  double mu1;
  double mu2;
  double mu3;
  double mu4;
  double mu5_std;
};

NormalGammaMoments moments_ng(const NormalGammaParams& params);

/// E[(eps / c)^k] for k = 1..5 by binomial expansion of ((v - u) / c)^k.
std::array<double, 5> standardized_moments(const NormalGammaParams& params);

/// Symmetric stable draw with CF exp(-kappa^alpha |t|^alpha)
/// (Chambers-Mallows-Stuck; exact normal draw at alpha = 2).
double sample_symmetric_stable(double alpha, double kappa, Rng& rng);

/// n i.i.d. draws of eps = v - u.
std::vector<double> sample_errors(const ErrorParams& params, std::size_t n, Rng& rng);

}  // namespace sfgof
