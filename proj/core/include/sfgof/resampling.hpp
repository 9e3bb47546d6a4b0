#pragma once

// Parametric bootstrap p-values, the warp-speed Monte Carlo design and the
// Lloyd size correction of power.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "sfgof/estimation.hpp"
#include "sfgof/model.hpp"

namespace sfgof::rs {

enum class Estimator { cols, mle };

std::string_view to_string(Estimator e) noexcept;
Estimator parse_estimator(std::string_view name);

/// Estimator settings shared by the single-dataset bootstrap and the Monte Carlo harness.
struct FitSettings {
  Family family = Family::normal_gamma;
  Estimator estimator = Estimator::cols;
  est::MleOptions mle;
};

/// A fitted null model together with the test statistic at each requested gamma.
struct NullFit {
  RegressionModel model;
  std::vector<double> statistics;
  std::optional<est::ColsEstimate> cols;
  std::optional<est::MleEstimate> mle;
};

/// Fit the null family and compute the MGF (normal/gamma) or CF (stable/gamma)
/// statistic. A statistic that overflows is reported as +infinity.
NullFit fit_null(const Sample& sample, const FitSettings& settings, const std::vector<double>& gammas);

/// Runs fn(i) for i in [0, count) on up to `workers` threads (0 = hardware
/// concurrency). The first exception by index is rethrown.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

struct BootstrapConfig {
  std::size_t B = 100;
  double gamma = 1.0;
  std::uint64_t seed = 0;
  FitSettings fit;
  std::size_t workers = 0;
  /// At most max_attempts_factor * B estimation attempts in total.
  std::size_t max_attempts_factor = 10;
};

struct BootstrapResult {
  double p_value = 1.0;
  double statistic = 0.0;
  NullFit fit;
  std::vector<double> bootstrap_statistics;
  std::size_t failures = 0;
};

/// p = (1 + #{T_b >= T_0}) / (B + 1).
double bootstrap_p_value(double statistic, const std::vector<double>& bootstrap_statistics);

BootstrapResult bootstrap_pvalue(const Sample& sample, const BootstrapConfig& config);

/// 0.7 NG(a) + 0.3 NG(b)-style two-component normal/gamma mixture.
struct Mixture {
  double weight = 0.7;
  NormalGammaParams first;
  NormalGammaParams second;
};

/// Student-t noise with nu degrees of freedom (unit scale) and Gamma(p, c) inefficiency.
struct StudentTGamma {
  double nu = 5.0;
  double p = 3.0;
  double c = 1.0;
};

using DataGenerator = std::variant<NormalGammaParams, StableGammaParams, Mixture, StudentTGamma>;

std::vector<double> sample_generator(const DataGenerator& gen, std::size_t n, Rng& rng);

struct WarpSpeedConfig {
  std::size_t M = 1000;
  std::size_t n = 100;
  double level = 0.05;
  DataGenerator generator = NormalGammaParams{};
  FitSettings fit;
  /// Several tuning parameters share the same Monte Carlo draws.
  std::vector<double> gammas{4.0};
  std::uint64_t seed = 0;
  /// Location model Y = beta + eps.
  double location = 1.0;
  std::size_t workers = 0;
  /// Share of M allowed to need a fresh Monte Carlo sample before the run is abandoned.
  double max_failure_share = 0.2;
  /// Bootstrap samples tried per Monte Carlo sample before that sample is redrawn.
  std::size_t max_bootstrap_attempts = 10;

  void validate() const;
};

struct ExperimentReport {
  double gamma = 0.0;
  double rejection_rate = 0.0;
  double critical_point = 0.0;
  std::vector<double> statistic_values;
  std::vector<double> bootstrap_values;
};

struct WarpSpeedResult {
  std::vector<ExperimentReport> reports;  // one per gamma
  /// Monte Carlo samples redrawn.
  std::size_t failures = 0;
  /// Bootstrap samples redrawn.
  std::size_t bootstrap_redraws = 0;
};

/// 1-based order-statistic index M - ceil(level M) of the critical point.
std::size_t critical_index(std::size_t M, double level);

/// Critical point and strict-inequality rejection rate.
ExperimentReport summarize(double gamma, std::vector<double> statistics, std::vector<double> bootstrap, double level);

WarpSpeedResult warp_speed(const WarpSpeedConfig& config);

/// Phi(Phi^{-1}(power) - Phi^{-1}(size_hat) + Phi^{-1}(level)).
double lloyd_correction(double power, double size_hat, double level = 0.05);

double std_normal_quantile(double p);

}  // namespace sfgof::rs
