#pragma once

// Firm-level technical efficiency from the conditional law of u given the
// composed residual z = v - u.

#include <memory>
#include <string>
#include <vector>

#include "sfgof/model.hpp"

namespace sfgof::eff {

struct EfficiencyOptions {
  double rel_tol = 1e-10;
  /// Grid size for the inverted stable noise density.
  std::size_t noise_grid_points = std::size_t{1} << 16;
};

/// Conditional moments of u given z, integrating f_u(u) f_v(z + u) over u.
/// The normal noise density is exact; stable noise comes from CF inversion on
/// a grid wide enough to cover `cover` (the residuals to be scored).
class EfficiencyCalculator {
 public:
  explicit EfficiencyCalculator(const ErrorParams& params, const std::vector<double>& cover = {},
                                EfficiencyOptions options = {});
  ~EfficiencyCalculator();
  EfficiencyCalculator(EfficiencyCalculator&&) noexcept;
  EfficiencyCalculator& operator=(EfficiencyCalculator&&) noexcept;

  /// E(exp(-u) | z), in (0, 1].
  double bc(double z) const;
  /// exp(-E(u | z)), in (0, 1].
  double jlms(double z) const;
  double conditional_mean(double z) const;
  /// int f_u(u) f_v(z + u) du, which equals the composed density at z.
  double posterior_mass(double z) const;
  double noise_density(double x) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

double efficiency_bc(const RegressionModel& model, double epsilon);
double efficiency_jlms(const RegressionModel& model, double epsilon);

struct EfficiencyScores {
  std::vector<double> bc;
  std::vector<double> jlms;
  std::vector<std::string> firm_ids;
};

/// Scores for every observation of `sample` at the fitted model.
EfficiencyScores efficiency_scores(const RegressionModel& model, const Sample& sample,
                                   std::vector<std::string> firm_ids = {});

}  // namespace sfgof::eff
