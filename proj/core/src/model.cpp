#include "sfgof/model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "sfgof/error.hpp"

namespace sfgof {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

// (p)_m = p (p + 1) ... (p + m - 1)
double rising(double p, int m) {
  double out = 1.0;
  for (int i = 0; i < m; ++i) out *= p + i;
  return out;
}

}  // namespace

void NormalGammaParams::validate() const {
  if (!positive_finite(sigma_v2) || !positive_finite(p) || !positive_finite(c)) {
    throw DomainError("normal/gamma parameters must be positive and finite (sigma_v2=" +
                      std::to_string(sigma_v2) + ", p=" + std::to_string(p) +
                      ", c=" + std::to_string(c) + ")");
  }
  if (!positive_finite(lambda())) throw DomainError("normal/gamma lambda is not finite");
}

double StableGammaParams::lambda() const { return std::pow(kappa / c, alpha); }

void StableGammaParams::validate() const {
  if (!positive_finite(kappa) || !positive_finite(p) || !positive_finite(c)) {
    throw DomainError("stable/gamma parameters kappa, p, c must be positive and finite");
  }
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw DomainError("stable tail index must lie in (1, 2], got " + std::to_string(alpha));
  }
  if (!positive_finite(lambda())) throw DomainError("stable/gamma lambda is not finite");
}

Family family_of(const ErrorParams& params) noexcept {
  return std::holds_alternative<NormalGammaParams>(params) ? Family::normal_gamma
                                                           : Family::stable_gamma;
}

std::string_view to_string(Family family) noexcept {
  return family == Family::normal_gamma ? "normal_gamma" : "stable_gamma";
}

Family parse_family(std::string_view name) {
  if (name == "normal_gamma" || name == "ng") return Family::normal_gamma;
  if (name == "stable_gamma" || name == "sg") return Family::stable_gamma;
  throw ConfigError("unknown family '" + std::string(name) +
                    "' (expected normal_gamma or stable_gamma)");
}

void validate(const ErrorParams& params) {
  std::visit([](const auto& p) { p.validate(); }, params);
}

double inefficiency_shape(const ErrorParams& params) noexcept {
  return std::visit([](const auto& p) { return p.p; }, params);
}

double inefficiency_scale(const ErrorParams& params) noexcept {
  return std::visit([](const auto& p) { return p.c; }, params);
}

void Sample::validate() const {
  if (y.size() != x.rows()) {
    throw ValidationError("sample has " + std::to_string(x.rows()) + " design rows but " +
                          std::to_string(y.size()) + " responses");
  }
  if (x.cols() < 1) throw ValidationError("design matrix has no columns");
  if (x.rows() < x.cols() + 1) {
    throw ValidationError("sample needs n >= k + 1 observations (n=" + std::to_string(x.rows()) +
                          ", k=" + std::to_string(x.cols()) + ")");
  }
  if (!x.allFinite() || !y.allFinite()) throw ValidationError("sample contains non-finite values");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) {
    throw RankDeficientError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                             " < " + std::to_string(x.cols()) + " columns)");
  }
}

Eigen::VectorXd residuals(const Sample& sample, const Eigen::VectorXd& beta) {
  if (beta.size() != sample.k()) {
    throw ValidationError("coefficient vector has length " + std::to_string(beta.size()) +
                          " but the design has " + std::to_string(sample.k()) + " columns");
  }
  return sample.y - sample.x * beta;
}

Sample location_sample(std::vector<double> y) {
  Sample s;
  s.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  s.x = Eigen::MatrixXd::Ones(s.y.size(), 1);
  return s;
}

double mgf_composed(const NormalGammaParams& params, double t) {
  const double base = 1.0 + params.c * t;
  if (!(base > 0.0)) throw DomainError("composed-error MGF requires 1 + c t > 0");
  return std::exp(0.5 * params.sigma_v2 * t * t - params.p * std::log(base));
}

double mgf_standardized(double lambda, double p, double t) {
  const double base = 1.0 + t;
  if (!(base > 0.0)) throw DomainError("standardized MGF requires 1 + t > 0");
  return std::exp(0.5 * lambda * t * t - p * std::log(base));
}

std::complex<double> cf_composed(const NormalGammaParams& params, double t) {
  const std::complex<double> one_ict(1.0, params.c * t);
  return std::exp(-0.5 * params.sigma_v2 * t * t - params.p * std::log(one_ict));
}

std::complex<double> cf_composed(const StableGammaParams& params, double t) {
  const std::complex<double> one_ict(1.0, params.c * t);
  const double stable_exponent = std::pow(params.kappa * std::abs(t), params.alpha);
  return std::exp(-stable_exponent - params.p * std::log(one_ict));
}

std::complex<double> cf_composed(const ErrorParams& params, double t) {
  return std::visit([t](const auto& p) { return cf_composed(p, t); }, params);
}

NormalGammaMoments moments_ng(const NormalGammaParams& params) {
  const double s2 = params.sigma_v2;
  const double p = params.p;
  const double c = params.c;
  const double lam = params.lambda();
  NormalGammaMoments m{};
  m.mu1 = -c * p;
  m.mu2 = s2 + c * c * p * (p + 1);
  m.mu3 = -c * c * c * p * (p + 1) * (p + 2) - 3 * c * p * s2;
  m.mu4 = 3 * s2 * s2 + std::pow(c, 4) * p * (p + 1) * (p + 2) * (p + 3) +
          6 * s2 * c * c * p * (p + 1);
  m.mu5_std = -15 * lam * lam * p - 10 * lam * p * (p + 1) * (p + 2) -
              p * (p + 1) * (p + 2) * (p + 3) * (p + 4);
  return m;
}

std::array<double, 5> standardized_moments(const NormalGammaParams& params) {
  const double lam = params.lambda();
  // E[v~^j] for v~ ~ N(0, lambda): zero for odd j, lambda^{j/2} (j-1)!! for even j.
  const std::array<double, 6> normal{1.0, 0.0, lam, 0.0, 3 * lam * lam, 0.0};
  std::array<double, 5> out{};
  for (int k = 1; k <= 5; ++k) {
    double sum = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      const int m = k - j;
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      sum += binom * normal[static_cast<std::size_t>(j)] * sign * rising(params.p, m);
      binom = binom * (k - j) / (j + 1);
    }
    out[static_cast<std::size_t>(k - 1)] = sum;
  }
  return out;
}

double sample_symmetric_stable(double alpha, double kappa, Rng& rng) {
  if (alpha == 2.0) {
    std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 * kappa);
    return normal(rng);
  }
  std::uniform_real_distribution<double> uniform(-0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
  std::exponential_distribution<double> exponential(1.0);
  const double v = uniform(rng);
  double w = exponential(rng);
  while (w == 0.0) w = exponential(rng);
  const double x = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
                   std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
  return kappa * x;
}

std::vector<double> sample_errors(const ErrorParams& params, std::size_t n, Rng& rng) {
  validate(params);
  std::vector<double> out(n);
  std::gamma_distribution<double> gamma(inefficiency_shape(params), inefficiency_scale(params));
  if (const auto* ng = std::get_if<NormalGammaParams>(&params)) {
    std::normal_distribution<double> normal(0.0, std::sqrt(ng->sigma_v2));
    for (auto& e : out) {
      const double v = normal(rng);
      e = v - gamma(rng);
    }
  } else {
    const auto& sg = std::get<StableGammaParams>(params);
    for (auto& e : out) {
      const double v = sample_symmetric_stable(sg.alpha, sg.kappa, rng);
      e = v - gamma(rng);
    }
  }
  return out;
}

}  // namespace sfgof
