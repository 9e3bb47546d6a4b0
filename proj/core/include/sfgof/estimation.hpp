#pragma once

// Estimation of the frontier and composed-error parameters: OLS, corrected
// least squares (normal/gamma), and maximum likelihood through a density
// obtained by Fourier inversion of the characteristic function.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "sfgof/cf_test.hpp"
#include "sfgof/mgf_test.hpp"
#include "sfgof/model.hpp"

namespace sfgof::est {

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
};

OlsFit ols(const Sample& sample);

/// Index of the constant (intercept) column of the design, if any.
std::optional<Eigen::Index> intercept_column(const Eigen::MatrixXd& x);

struct ColsEstimate {
  Eigen::VectorXd beta;
  double sigma_v2 = 0.0;
  /// sigma_v2 straight from the moment solution, before clamping.
  double sigma_v2_unrepaired = 0.0;
  double p = 0.0;
  double c = 0.0;
  bool converged = false;
  bool sigma_v2_clamped = false;
  /// p hit the end of its bracket; the fourth-moment condition is then not met.
  bool p_clamped = false;
  /// eps_j = Y_j - X_j beta at the corrected intercept.
  Eigen::VectorXd residuals;

  NormalGammaParams params() const { return {sigma_v2, p, c}; }
  RegressionModel model() const { return {beta, params(), SignConvention::production}; }
  mgf::StandardizedResiduals standardized() const;
};

/// Floor applied to a non-positive moment solution for sigma_v2.
inline constexpr double kSigmaV2Floor = 1e-8;

/// Bracket for the gamma shape in the moment solution.
inline constexpr double kPMin = 1e-6;
inline constexpr double kPMax = 1e3;

/// Corrected least squares. Needs an intercept column and n >= k + 4.
ColsEstimate cols_fit(const Sample& sample);

/// Density values on an evenly spaced grid.
struct DensityGrid {
  std::vector<double> points;
  std::vector<double> values;
  double spacing = 0.0;

  double lower() const { return points.front(); }
  double upper() const { return points.back(); }
  bool contains(double x) const { return x >= lower() && x <= upper(); }
  /// Linear interpolation; 0 outside the grid.
  double operator()(double x) const;
  /// Trapezoid mass.
  double mass() const;
};

using CharacteristicFunction = std::function<std::complex<double>(double)>;

struct InversionOptions {
  /// Largest accepted density at the two ends of the window, relative to the peak.
  double boundary_tol = 1e-10;
  double mass_tol = 1e-3;
};

/// Density on N points (N a power of two) covering [lower, upper), from the
/// characteristic function by the discrete Fourier transform.
DensityGrid cf_inversion_density(const CharacteristicFunction& cf, std::size_t n_points, double lower,
                                 double upper, InversionOptions options = {});

/// Symmetric window [-span, span).
DensityGrid cf_inversion_density(const CharacteristicFunction& cf, std::size_t n_points, double span,
                                 InversionOptions options = {});

struct GridOptions {
  std::size_t n_points = std::size_t{1} << 14;
  /// Explicit window; residuals outside it get zero density. When unset the
  /// window comes from the parameters and is widened to cover the residuals.
  std::optional<double> lower;
  std::optional<double> upper;
};

/// Default window for the composed-error density of `params`.
std::pair<double, double> default_window(const ErrorParams& params);

/// Density of the composed error on its grid.
DensityGrid composed_density(const ErrorParams& params, const GridOptions& grid = {},
                             const std::vector<double>& cover = {});

/// Sum of log densities of the residuals; -infinity when any residual has zero density.
double log_likelihood(const RegressionModel& model, const Sample& sample, const GridOptions& grid = {});

struct MleOptions {
  std::size_t max_iterations = 2000;
  /// A simplex round ends when its size in transformed coordinates drops below this.
  double size_tol = 1e-4;
  /// Restarts stop once a round improves the objective by less than this, relatively.
  double f_rel_tol = 1e-8;
  /// Hold alpha at this value (stable/gamma only).
  std::optional<double> fixed_alpha;
  GridOptions grid;
};

struct MleEstimate {
  RegressionModel params;
  double log_likelihood = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  Eigen::VectorXd residuals;

  cf::CfStandardizedResiduals standardized() const;
  mgf::StandardizedResiduals standardized_mgf() const;
};

/// A starting point: COLS when it succeeds, else OLS with moderate defaults.
RegressionModel default_init(Family family, const Sample& sample);

MleEstimate mle_fit(Family family, const Sample& sample, const RegressionModel& init, const MleOptions& options = {});

}  // namespace sfgof::est
