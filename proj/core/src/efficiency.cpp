#include "sfgof/efficiency.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "sfgof/error.hpp"
#include "sfgof/estimation.hpp"
#include "sfgof/quadrature.hpp"

namespace sfgof::eff {

namespace {

using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

}  // namespace

struct EfficiencyCalculator::Impl {
  ErrorParams params;
  EfficiencyOptions options;
  double p = 1.0;
  double c = 1.0;
  double noise_scale = 1.0;  // sigma_v or kappa
  double log_norm = 0.0;     // log(p Gamma(p) c^p)
  double u_reach = 0.0;      // gamma 0.99999 quantile + 10 c
  std::optional<Spline> spline;
  double grid_lower = 0.0;
  double grid_upper = 0.0;

  double f_v(double x) const {
    if (!spline) {
      const double s2 = noise_scale * noise_scale;
      return std::exp(-0.5 * x * x / s2) / std::sqrt(2.0 * std::numbers::pi * s2);
    }
    if (x < grid_lower || x > grid_upper) return 0.0;
    return std::max(0.0, (*spline)(x));
  }

  // Integrates g(u) f_u(u) f_v(z + u) over u. On the first segment [0, b] the
  // gamma factor p u^{p-1} is integrated exactly against the value at u = 0,
  // which leaves a bounded integrand for tanh-sinh even when p is tiny.
  template <class G>
  double moment(double z, G&& g) const {
    if (!std::isfinite(z)) throw DomainError("efficiency needs a finite residual");
    if (spline && (z < grid_lower || z > grid_upper)) {
      throw DomainError("residual " + std::to_string(z) + " lies outside the noise density grid");
    }
    const double reach = spline ? grid_upper - z : 40.0 * noise_scale;
    const double upper_u = std::max(u_reach, -z + reach);
    std::vector<double> breaks{0.0, upper_u};
    for (double k : {-10.0, 0.0, 10.0}) {
      const double b = -z + k * noise_scale;
      if (b > 0.0 && b < upper_u) breaks.push_back(b);
    }
    std::sort(breaks.begin(), breaks.end());
    // f_u(u) = p u^{p-1} h(u) with h carrying everything but the power.
    const auto h = [&](double u) {
      const double fv = f_v(z + u);
      if (fv == 0.0) return 0.0;
      return g(u) * std::exp(-u / c - log_norm) * fv;
    };
    const double h0 = h(0.0);
    const auto near_zero = [&](double u) {
      if (u <= 0.0) return 0.0;
      return p * std::pow(u, p - 1.0) * (h(u) - h0);
    };
    const auto away = [&](double u) { return p * std::pow(u, p - 1.0) * h(u); };
    quad::Options q;
    // The interpolated stable noise density carries its own error floor.
    q.rel_tol = spline ? std::max(options.rel_tol, 1e-8) : options.rel_tol;
    q.abs_tol = spline ? 1e-15 : 0.0;
    double total = h0 * std::pow(breaks[1], p) + quad::integrate_endpoint_singular(near_zero, 0.0, breaks[1], q);
    for (std::size_t i = 1; i + 1 < breaks.size(); ++i) {
      if (breaks[i + 1] > breaks[i]) total += quad::integrate(away, breaks[i], breaks[i + 1], q);
    }
    return total;
  }
};

EfficiencyCalculator::EfficiencyCalculator(const ErrorParams& params, const std::vector<double>& cover,
                                           EfficiencyOptions options)
    : impl_(std::make_unique<Impl>()) {
  validate(params);
  auto& m = *impl_;
  m.params = params;
  m.options = options;
  m.p = inefficiency_shape(params);
  m.c = inefficiency_scale(params);
  m.log_norm = boost::math::lgamma(m.p + 1.0) + m.p * std::log(m.c);
  m.u_reach = m.c * boost::math::gamma_q_inv(m.p, 1e-5) + 10.0 * m.c;
  if (const auto* ng = std::get_if<NormalGammaParams>(&params)) {
    m.noise_scale = std::sqrt(ng->sigma_v2);
    return;
  }
  const auto& sg = std::get<StableGammaParams>(params);
  m.noise_scale = sg.kappa;
  double span = sg.kappa * std::pow(10.0, 5.0 / (1.0 + sg.alpha));
  for (double z : cover) span = std::max(span, 1.01 * std::max(std::abs(z), std::abs(z) + m.u_reach));
  est::InversionOptions inv;
  inv.boundary_tol = 1e-3;
  inv.mass_tol = 2e-3;
  const double kappa = sg.kappa;
  const double alpha = sg.alpha;
  const est::DensityGrid grid = est::cf_inversion_density(
      [kappa, alpha](double t) { return std::complex<double>(std::exp(-std::pow(kappa * std::abs(t), alpha)), 0.0); },
      options.noise_grid_points, span, inv);
  m.grid_lower = grid.lower();
  m.grid_upper = grid.upper();
  m.spline.emplace(grid.values.begin(), grid.values.end(), grid.lower(), grid.spacing);
}

EfficiencyCalculator::~EfficiencyCalculator() = default;
EfficiencyCalculator::EfficiencyCalculator(EfficiencyCalculator&&) noexcept = default;
EfficiencyCalculator& EfficiencyCalculator::operator=(EfficiencyCalculator&&) noexcept = default;

double EfficiencyCalculator::posterior_mass(double z) const {
  return impl_->moment(z, [](double) { return 1.0; });
}

double EfficiencyCalculator::noise_density(double x) const { return impl_->f_v(x); }

double EfficiencyCalculator::bc(double z) const {
  const double mass = posterior_mass(z);
  if (!(mass > 0.0)) throw QuadratureError("posterior of u has no mass at residual " + std::to_string(z));
  const double num = impl_->moment(z, [](double u) { return std::exp(-u); });
  return std::clamp(num / mass, std::numeric_limits<double>::min(), 1.0);
}

double EfficiencyCalculator::conditional_mean(double z) const {
  const double mass = posterior_mass(z);
  if (!(mass > 0.0)) throw QuadratureError("posterior of u has no mass at residual " + std::to_string(z));
  return impl_->moment(z, [](double u) { return u; }) / mass;
}

double EfficiencyCalculator::jlms(double z) const {
  return std::clamp(std::exp(-conditional_mean(z)), std::numeric_limits<double>::min(), 1.0);
}

double efficiency_bc(const RegressionModel& model, double epsilon) {
  return EfficiencyCalculator(model.errors, {epsilon}).bc(epsilon);
}

double efficiency_jlms(const RegressionModel& model, double epsilon) {
  return EfficiencyCalculator(model.errors, {epsilon}).jlms(epsilon);
}

EfficiencyScores efficiency_scores(const RegressionModel& model, const Sample& sample,
                                   std::vector<std::string> firm_ids) {
  const Eigen::VectorXd eps = residuals(sample, model.beta);
  if (!firm_ids.empty() && firm_ids.size() != static_cast<std::size_t>(eps.size())) {
    throw ValidationError("firm id count does not match the sample size");
  }
  const std::vector<double> z(eps.data(), eps.data() + eps.size());
  const EfficiencyCalculator calc(model.errors, z);
  EfficiencyScores out;
  out.firm_ids = std::move(firm_ids);
  out.bc.reserve(z.size());
  out.jlms.reserve(z.size());
  for (double zi : z) {
    out.bc.push_back(calc.bc(zi));
    out.jlms.push_back(calc.jlms(zi));
  }
  return out;
}

}  // namespace sfgof::eff
