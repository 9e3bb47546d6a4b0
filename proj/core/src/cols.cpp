#include <algorithm>
#include <cmath>
#include <string>

#include "sfgof/error.hpp"
#include "sfgof/estimation.hpp"

namespace sfgof::est {

mgf::StandardizedResiduals ColsEstimate::standardized() const {
  mgf::StandardizedResiduals out;
  out.r.resize(static_cast<std::size_t>(residuals.size()));
  for (Eigen::Index i = 0; i < residuals.size(); ++i) out.r[static_cast<std::size_t>(i)] = residuals(i) / c;
  out.p_hat = p;
  out.lambda_hat = sigma_v2 / (c * c);
  out.c_hat = c;
  return out;
}

ColsEstimate cols_fit(const Sample& sample) {
  const auto n = sample.n();
  const auto k = sample.k();
  if (n < k + 4) {
    throw ValidationError("COLS needs n >= k + 4 (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
  }
  const auto icol = intercept_column(sample.x);
  if (!icol) throw ConfigError("COLS needs a constant (intercept) column in the design");

  // With an intercept the orthogonality conditions leave the slopes at their OLS
  // values and only shift the intercept by c p; the three higher-moment conditions
  //   m2 = s2 + c^2 p,  m3 = -2 c^3 p,  m4 = 3 s2^2 + 6 s2 c^2 p + 3 p (p + 2) c^4
  // on the central moments of the OLS residuals then solve in closed form, since
  // m4 - 3 m2^2 = 6 c^4 p.
  const OlsFit fit = ols(sample);
  const Eigen::VectorXd e = fit.residuals.array() - fit.residuals.mean();
  const double m2 = e.array().square().mean();
  const double m3 = e.array().cube().mean();
  const double m4 = e.array().square().square().mean();
  if (!(m3 < 0.0)) {
    throw EstimationError(EstimationError::Kind::no_solution,
                          "COLS has no solution: residual third moment is non-negative (wrong skew)");
  }
  // Eliminating c through the third moment leaves m4 - 3 m2^2 = 6 (-m3/2)^{4/3} p^{-1/3},
  // a decreasing function of p. Its root is bracketed in [kPMin, kPMax]; a
  // non-positive excess kurtosis pushes the root to the upper end.
  const double excess = m4 - 3.0 * m2 * m2;
  ColsEstimate est;
  est.p = excess > 0.0 ? 13.5 * std::pow(m3, 4) / std::pow(excess, 3) : kPMax;
  if (!(excess > 0.0) || est.p > kPMax || est.p < kPMin) {
    est.p = std::clamp(est.p, kPMin, kPMax);
    est.p_clamped = true;
  }
  est.c = std::cbrt(-m3 / (2.0 * est.p));
  est.sigma_v2_unrepaired = m2 - est.p * est.c * est.c;
  est.sigma_v2 = est.sigma_v2_unrepaired;
  if (!(est.sigma_v2 > 0.0)) {
    est.sigma_v2 = kSigmaV2Floor;
    est.sigma_v2_clamped = true;
  }
  if (!std::isfinite(est.c) || !std::isfinite(est.p) || !(est.p > 0.0)) {
    throw EstimationError(EstimationError::Kind::no_solution, "COLS moment solution is not finite");
  }
  const double shift = est.c * est.p;
  est.beta = fit.beta;
  est.beta(*icol) += shift / sample.x(0, *icol);
  est.residuals = e.array() - shift;
  est.converged = true;
  return est;
}

}  // namespace sfgof::est
