#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "sfgof/error.hpp"
#include "sfgof/estimation.hpp"

namespace sfgof::est {

namespace {

// Unconstrained coordinates. The coefficients are mapped through a thin QR of the
// centered regressors, so every linear coordinate moves the fitted values on a
// comparable scale; with an intercept, its coordinate is the mean of intercept plus
// error, mu = beta_0 v + mean(x)' beta - p c. Then come log of the noise scale, a
// logistic onto (1, 2) for the stable tail index, log p and log of the mean
// inefficiency p c. Large p with small c makes u nearly constant and trades off
// against the intercept; these coordinates keep that ridge roughly axis-aligned.
struct Layout {
  Family family;
  Eigen::Index k = 0;
  std::optional<double> fixed_alpha;
  std::optional<Eigen::Index> icol;
  double icol_value = 1.0;
  // beta (before the p c intercept shift) = to_beta * linear coordinates.
  Eigen::MatrixXd to_beta;
  Eigen::MatrixXd from_beta;

  Layout(Family fam, const Eigen::MatrixXd& x, std::optional<double> alpha)
      : family(fam), k(x.cols()), fixed_alpha(alpha), icol(intercept_column(x)) {
    const Eigen::Index n = x.rows();
    const double root_n = std::sqrt(static_cast<double>(n));
    to_beta = Eigen::MatrixXd::Zero(k, k);
    std::vector<Eigen::Index> slopes;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!icol || j != *icol) slopes.push_back(j);
    }
    const auto m = static_cast<Eigen::Index>(slopes.size());
    Eigen::MatrixXd xs(n, m);
    for (Eigen::Index j = 0; j < m; ++j) xs.col(j) = x.col(slopes[static_cast<std::size_t>(j)]);
    Eigen::RowVectorXd means = Eigen::RowVectorXd::Zero(m);
    if (icol) {
      icol_value = x(0, *icol);
      means = xs.colwise().mean();
      xs.rowwise() -= means;
    }
    if (m > 0) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(xs);
      const Eigen::MatrixXd r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
      const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(m, m));
      for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
          to_beta(slopes[static_cast<std::size_t>(j)], slopes[static_cast<std::size_t>(i)]) = root_n * r_inv(j, i);
        }
      }
    }
    if (icol) {
      // beta_0 = (mu - means * beta_slopes) / v
      to_beta(*icol, *icol) = 1.0 / icol_value;
      for (Eigen::Index i = 0; i < m; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
          acc += means(j) * to_beta(slopes[static_cast<std::size_t>(j)], slopes[static_cast<std::size_t>(i)]);
        }
        to_beta(*icol, slopes[static_cast<std::size_t>(i)]) = -acc / icol_value;
      }
    }
    from_beta = to_beta.inverse();
  }

  std::size_t size() const {
    const std::size_t extra = family == Family::normal_gamma ? 3 : (fixed_alpha ? 3 : 4);
    return static_cast<std::size_t>(k) + extra;
  }

  RegressionModel decode(const gsl_vector* v) const {
    Eigen::VectorXd lin(k);
    for (Eigen::Index i = 0; i < k; ++i) lin(i) = gsl_vector_get(v, static_cast<std::size_t>(i));
    auto at = [&](std::size_t j) { return gsl_vector_get(v, static_cast<std::size_t>(k) + j); };
    RegressionModel m;
    double p = 0.0;
    double mean_u = 0.0;
    if (family == Family::normal_gamma) {
      p = std::exp(at(1));
      mean_u = std::exp(at(2));
      m.errors = NormalGammaParams{std::exp(at(0)), p, mean_u / p};
    } else if (fixed_alpha) {
      p = std::exp(at(1));
      mean_u = std::exp(at(2));
      m.errors = StableGammaParams{std::exp(at(0)), *fixed_alpha, p, mean_u / p};
    } else {
      const double alpha = 1.0 + 1.0 / (1.0 + std::exp(-at(1)));
      p = std::exp(at(2));
      mean_u = std::exp(at(3));
      m.errors = StableGammaParams{std::exp(at(0)), alpha, p, mean_u / p};
    }
    m.beta = to_beta * lin;
    if (icol) m.beta(*icol) += mean_u / icol_value;
    return m;
  }

  std::vector<double> encode(const RegressionModel& m) const {
    const double p = inefficiency_shape(m.errors);
    const double mean_u = p * inefficiency_scale(m.errors);
    Eigen::VectorXd beta = m.beta;
    if (icol) beta(*icol) -= mean_u / icol_value;
    const Eigen::VectorXd lin = from_beta * beta;
    std::vector<double> out(lin.data(), lin.data() + lin.size());
    if (family == Family::normal_gamma) {
      const auto& ng = std::get<NormalGammaParams>(m.errors);
      out.push_back(std::log(ng.sigma_v2));
    } else {
      const auto& sg = std::get<StableGammaParams>(m.errors);
      out.push_back(std::log(sg.kappa));
      if (!fixed_alpha) {
        // Keep the start strictly inside (1, 2).
        const double a = std::clamp(sg.alpha, 1.0 + 1e-6, 2.0 - 1e-6) - 1.0;
        out.push_back(std::log(a / (1.0 - a)));
      }
    }
    out.insert(out.end(), {std::log(p), std::log(mean_u)});
    return out;
  }
};

struct Objective {
  Layout layout;
  const Sample* sample;
  const GridOptions* grid;
};

double negative_log_likelihood(const gsl_vector* v, void* data) {
  const auto* obj = static_cast<const Objective*>(data);
  try {
    const double ll = log_likelihood(obj->layout.decode(v), *obj->sample, *obj->grid);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  } catch (const std::exception&) {
    // Out-of-domain or unrepresentable trial points are simply rejected.
    return std::numeric_limits<double>::infinity();
  }
}

struct SimplexDeleter {
  void operator()(gsl_multimin_fminimizer* s) const { gsl_multimin_fminimizer_free(s); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

}  // namespace

cf::CfStandardizedResiduals MleEstimate::standardized() const {
  const auto* sg = std::get_if<StableGammaParams>(&params.errors);
  if (sg == nullptr) throw ConfigError("CF residuals need a stable/gamma estimate");
  cf::CfStandardizedResiduals out;
  out.r.resize(static_cast<std::size_t>(residuals.size()));
  for (Eigen::Index i = 0; i < residuals.size(); ++i) out.r[static_cast<std::size_t>(i)] = residuals(i) / sg->c;
  out.p_hat = sg->p;
  out.alpha_hat = sg->alpha;
  out.lambda_hat = sg->lambda();
  return out;
}

mgf::StandardizedResiduals MleEstimate::standardized_mgf() const {
  const auto* ng = std::get_if<NormalGammaParams>(&params.errors);
  if (ng == nullptr) throw ConfigError("MGF residuals need a normal/gamma estimate");
  mgf::StandardizedResiduals out;
  out.r.resize(static_cast<std::size_t>(residuals.size()));
  for (Eigen::Index i = 0; i < residuals.size(); ++i) out.r[static_cast<std::size_t>(i)] = residuals(i) / ng->c;
  out.p_hat = ng->p;
  out.lambda_hat = ng->lambda();
  out.c_hat = ng->c;
  return out;
}

RegressionModel default_init(Family family, const Sample& sample) {
  RegressionModel init;
  NormalGammaParams ng;
  try {
    const ColsEstimate cols = cols_fit(sample);
    init.beta = cols.beta;
    ng = cols.params();
    // Boundary COLS solutions make poor starting points for a simplex in log space.
    const double sd = std::sqrt(cols.sigma_v2 + cols.p * cols.c * cols.c);
    ng.sigma_v2 = std::max(ng.sigma_v2, 0.01 * sd * sd);
    ng.p = std::clamp(ng.p, 0.05, 20.0);
  } catch (const std::exception&) {
    const OlsFit fit = ols(sample);
    const double sd = std::sqrt(fit.residuals.array().square().mean());
    init.beta = fit.beta;
    ng = {0.5 * sd * sd, 1.0, 0.7 * sd};
    if (const auto icol = intercept_column(sample.x)) init.beta(*icol) += ng.p * ng.c / sample.x(0, *icol);
  }
  if (family == Family::normal_gamma) {
    init.errors = ng;
  } else {
    init.errors = StableGammaParams{std::sqrt(0.5 * ng.sigma_v2), 1.9, ng.p, ng.c};
  }
  return init;
}

MleEstimate mle_fit(Family family, const Sample& sample, const RegressionModel& init, const MleOptions& options) {
  sample.validate();
  validate(init.errors);
  if (family_of(init.errors) != family) throw ConfigError("initial parameters belong to another family");
  if (init.beta.size() != sample.k()) throw ValidationError("initial beta has the wrong length");
  if (options.fixed_alpha && !(*options.fixed_alpha > 1.0 && *options.fixed_alpha <= 2.0)) {
    throw DomainError("fixed alpha must lie in (1, 2]");
  }
  Objective obj{Layout(family, sample.x, family == Family::stable_gamma ? options.fixed_alpha : std::nullopt),
                &sample, &options.grid};
  const std::size_t dim = obj.layout.size();
  const std::vector<double> start = obj.layout.encode(init);

  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(dim));
  std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(dim));
  const double resid_scale = std::sqrt(std::max(1e-12, residuals(sample, init.beta).array().square().mean()));
  for (std::size_t i = 0; i < dim; ++i) {
    gsl_vector_set(x.get(), i, start[i]);
    const bool is_linear = i < static_cast<std::size_t>(sample.k());
    gsl_vector_set(step.get(), i, is_linear ? 0.2 * resid_scale : 0.3);
  }
  gsl_multimin_function fn{&negative_log_likelihood, dim, &obj};
  if (!std::isfinite(negative_log_likelihood(x.get(), &obj))) {
    throw EstimationError(EstimationError::Kind::no_solution, "log-likelihood is not finite at the starting point");
  }

  std::unique_ptr<gsl_multimin_fminimizer, SimplexDeleter> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim));
  gsl_error_handler_t* old_handler = gsl_set_error_handler_off();
  MleEstimate out;
  bool converged = false;
  std::size_t iter = 0;
  // Restart from each optimum with a fresh simplex until a round no longer
  // improves the objective; this guards against premature simplex collapse.
  double best = std::numeric_limits<double>::infinity();
  for (int round = 0; iter < options.max_iterations; ++round) {
    gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());
    converged = false;
    while (iter < options.max_iterations) {
      ++iter;
      if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), options.size_tol) == GSL_SUCCESS) {
        converged = true;
        break;
      }
    }
    gsl_vector_memcpy(x.get(), gsl_multimin_fminimizer_x(s.get()));
    const double value = gsl_multimin_fminimizer_minimum(s.get());
    const bool improved = best - value > options.f_rel_tol * std::abs(value);
    best = std::min(best, value);
    if (converged && !improved && round > 0) break;
  }
  gsl_set_error_handler(old_handler);

  out.params = obj.layout.decode(x.get());
  out.params.sign = init.sign;
  out.log_likelihood = -best;
  out.converged = converged;
  out.iterations = iter;
  out.residuals = residuals(sample, out.params.beta);
  if (!std::isfinite(out.log_likelihood)) {
    throw EstimationError(EstimationError::Kind::non_convergence, "maximum likelihood ended at a non-finite value");
  }
  return out;
}

}  // namespace sfgof::est
