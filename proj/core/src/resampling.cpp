#include "sfgof/resampling.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>

#include "sfgof/cf_test.hpp"
#include "sfgof/error.hpp"
#include "sfgof/mgf_test.hpp"
#include "sfgof/special_functions.hpp"

namespace sfgof::rs {

std::string_view to_string(Estimator e) noexcept { return e == Estimator::cols ? "cols" : "mle"; }

Estimator parse_estimator(std::string_view name) {
  if (name == "cols") return Estimator::cols;
  if (name == "mle") return Estimator::mle;
  throw ConfigError("unknown estimator '" + std::string(name) + "' (expected cols or mle)");
}

namespace {

// A statistic too large to represent exceeds every finite critical value.
template <class F>
double statistic_or_inf(F&& f) {
  try {
    return f();
  } catch (const OverflowError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

NullFit fit_null(const Sample& sample, const FitSettings& settings, const std::vector<double>& gammas) {
  NullFit out;
  if (settings.family == Family::normal_gamma) {
    mgf::StandardizedResiduals r;
    if (settings.estimator == Estimator::cols) {
      out.cols = est::cols_fit(sample);
      out.model = out.cols->model();
      r = out.cols->standardized();
    } else {
      out.mle = est::mle_fit(Family::normal_gamma, sample, est::default_init(Family::normal_gamma, sample),
                             settings.mle);
      out.model = out.mle->params;
      r = out.mle->standardized_mgf();
    }
    for (double g : gammas) {
      out.statistics.push_back(statistic_or_inf([&] { return mgf::statistic_closed(r, g).statistic; }));
    }
    return out;
  }
  if (settings.estimator != Estimator::mle) {
    throw ConfigError("the stable/gamma null is fitted by maximum likelihood only");
  }
  RegressionModel init = est::default_init(Family::stable_gamma, sample);
  if (settings.mle.fixed_alpha) std::get<StableGammaParams>(init.errors).alpha = *settings.mle.fixed_alpha;
  out.mle = est::mle_fit(Family::stable_gamma, sample, init, settings.mle);
  out.model = out.mle->params;
  const cf::CfStandardizedResiduals r = out.mle->standardized();
  for (double g : gammas) out.statistics.push_back(statistic_or_inf([&] { return cf::statistic_closed(r, g); }));
  return out;
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  std::vector<std::exception_ptr> errors(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double bootstrap_p_value(double statistic, const std::vector<double>& bootstrap_statistics) {
  const auto exceed = std::count_if(bootstrap_statistics.begin(), bootstrap_statistics.end(),
                                    [statistic](double t) { return t >= statistic; });
  return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(bootstrap_statistics.size()) + 1.0);
}

namespace {

// Failures inside resampling loops that call for a fresh draw rather than an abort.
bool is_redrawable(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const NumericalError&) {
    return true;
  } catch (const DomainError&) {
    return true;
  } catch (const ConfigError&) {
    // A density window that cannot hold the fitted law; specific to the draw.
    return true;
  } catch (...) {
    return false;
  }
}

Sample with_response(const Sample& base, const RegressionModel& model, const std::vector<double>& eps) {
  Sample s;
  s.x = base.x;
  s.y = base.x * model.beta;
  for (Eigen::Index i = 0; i < s.y.size(); ++i) s.y(i) += eps[static_cast<std::size_t>(i)];
  return s;
}

}  // namespace

BootstrapResult bootstrap_pvalue(const Sample& sample, const BootstrapConfig& config) {
  if (config.B < 99) throw ConfigError("bootstrap needs B >= 99 replicates");
  sample.validate();
  BootstrapResult out;
  out.fit = fit_null(sample, config.fit, {config.gamma});
  out.statistic = out.fit.statistics.front();
  out.bootstrap_statistics.assign(config.B, 0.0);
  std::vector<std::size_t> failures(config.B, 0);
  const std::size_t max_failures = (config.max_attempts_factor - 1) * config.B;
  std::atomic<std::size_t> total_failures{0};
  parallel_for(config.B, config.workers, [&](std::size_t b) {
    for (std::size_t attempt = 0;; ++attempt) {
      Rng rng = make_rng(derive_seed(config.seed, b), attempt);
      try {
        const auto eps = sample_errors(out.fit.model.errors, static_cast<std::size_t>(sample.n()), rng);
        const NullFit refit = fit_null(with_response(sample, out.fit.model, eps), config.fit, {config.gamma});
        out.bootstrap_statistics[b] = refit.statistics.front();
        return;
      } catch (...) {
        auto e = std::current_exception();
        if (!is_redrawable(e)) throw;
        ++failures[b];
        if (++total_failures > max_failures) {
          throw EstimationError(EstimationError::Kind::too_many_failures,
                                "bootstrap gave up after " + std::to_string(config.max_attempts_factor * config.B) +
                                    " attempts");
        }
      }
    }
  });
  for (auto f : failures) out.failures += f;
  out.p_value = bootstrap_p_value(out.statistic, out.bootstrap_statistics);
  return out;
}

std::vector<double> sample_generator(const DataGenerator& gen, std::size_t n, Rng& rng) {
  if (const auto* ng = std::get_if<NormalGammaParams>(&gen)) return sample_errors(*ng, n, rng);
  if (const auto* sg = std::get_if<StableGammaParams>(&gen)) return sample_errors(*sg, n, rng);
  if (const auto* mix = std::get_if<Mixture>(&gen)) {
    if (!(mix->weight >= 0.0 && mix->weight <= 1.0)) throw DomainError("mixture weight must lie in [0, 1]");
    mix->first.validate();
    mix->second.validate();
    std::bernoulli_distribution pick(mix->weight);
    std::vector<double> out(n);
    for (auto& e : out) {
      const auto& comp = pick(rng) ? mix->first : mix->second;
      e = sample_errors(comp, 1, rng).front();
    }
    return out;
  }
  const auto& tg = std::get<StudentTGamma>(gen);
  if (!(tg.nu > 0.0) || !(tg.p > 0.0) || !(tg.c > 0.0)) throw DomainError("Student-t/gamma parameters must be positive");
  std::student_t_distribution<double> t(tg.nu);
  std::gamma_distribution<double> u(tg.p, tg.c);
  std::vector<double> out(n);
  for (auto& e : out) {
    const double v = t(rng);
    e = v - u(rng);
  }
  return out;
}

void WarpSpeedConfig::validate() const {
  if (M < 1 || n < 2) throw ConfigError("warp-speed needs M >= 1 and n >= 2");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  if (static_cast<double>(M) * level < 10.0) throw ConfigError("warp-speed needs M * level >= 10");
  if (gammas.empty()) throw ConfigError("warp-speed needs at least one gamma");
  for (double g : gammas) {
    if (!(g > 0.0)) throw ConfigError("gamma must be positive");
  }
}

std::size_t critical_index(std::size_t M, double level) {
  const auto drop = static_cast<std::size_t>(std::ceil(level * static_cast<double>(M) - 1e-9));
  if (drop >= M) throw ConfigError("level too large for M");
  return M - drop;
}

ExperimentReport summarize(double gamma, std::vector<double> statistics, std::vector<double> bootstrap, double level) {
  const std::size_t M = bootstrap.size();
  ExperimentReport rep;
  rep.gamma = gamma;
  std::vector<double> sorted = bootstrap;
  std::sort(sorted.begin(), sorted.end());
  rep.critical_point = sorted[critical_index(M, level) - 1];
  const auto rejections = std::count_if(statistics.begin(), statistics.end(),
                                        [&](double t) { return t > rep.critical_point; });
  rep.rejection_rate = static_cast<double>(rejections) / static_cast<double>(statistics.size());
  rep.statistic_values = std::move(statistics);
  rep.bootstrap_values = std::move(bootstrap);
  return rep;
}

WarpSpeedResult warp_speed(const WarpSpeedConfig& config) {
  config.validate();
  const std::size_t M = config.M;
  const std::size_t G = config.gammas.size();
  std::vector<std::vector<double>> t(M);
  std::vector<std::vector<double>> t_hat(M);
  std::vector<std::size_t> failures(M, 0);
  std::vector<std::size_t> redraws(M, 0);
  const auto max_failures = static_cast<std::size_t>(config.max_failure_share * static_cast<double>(M));
  std::atomic<std::size_t> total_failures{0};
  const Sample design = location_sample(std::vector<double>(config.n, 0.0));
  const auto count_failure = [&](std::size_t m) {
    ++failures[m];
    if (++total_failures > max_failures) {
      throw EstimationError(EstimationError::Kind::too_many_failures,
                            "more than " + std::to_string(max_failures) + " Monte Carlo samples needed a redraw");
    }
  };

  parallel_for(M, config.workers, [&](std::size_t m) {
    for (std::size_t attempt = 0;; ++attempt) {
      Rng rng = make_rng(derive_seed(config.seed, m), attempt);
      std::optional<NullFit> fit;
      try {
        std::vector<double> y = sample_generator(config.generator, config.n, rng);
        for (auto& v : y) v += config.location;
        fit = fit_null(location_sample(y), config.fit, config.gammas);
      } catch (...) {
        if (!is_redrawable(std::current_exception())) throw;
        count_failure(m);
        continue;
      }
      // Only the bootstrap sample is redrawn when its estimation fails.
      for (std::size_t b = 0; b < config.max_bootstrap_attempts; ++b) {
        try {
          const auto eps = sample_errors(fit->model.errors, config.n, rng);
          const NullFit refit = fit_null(with_response(design, fit->model, eps), config.fit, config.gammas);
          t[m] = fit->statistics;
          t_hat[m] = refit.statistics;
          return;
        } catch (...) {
          if (!is_redrawable(std::current_exception())) throw;
          ++redraws[m];
        }
      }
      count_failure(m);
    }
  });

  WarpSpeedResult out;
  for (auto f : failures) out.failures += f;
  for (auto r : redraws) out.bootstrap_redraws += r;
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<double> stats(M);
    std::vector<double> boot(M);
    for (std::size_t m = 0; m < M; ++m) {
      stats[m] = t[m][g];
      boot[m] = t_hat[m][g];
    }
    out.reports.push_back(summarize(config.gammas[g], std::move(stats), std::move(boot), config.level));
  }
  return out;
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double lloyd_correction(double power, double size_hat, double level) {
  for (double a : {power, size_hat, level}) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("Lloyd correction needs arguments strictly inside (0, 1)");
  }
  return special::std_normal_cdf(std_normal_quantile(power) - std_normal_quantile(size_hat) +
                                 std_normal_quantile(level));
}

}  // namespace sfgof::rs
