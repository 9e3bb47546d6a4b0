#include "sfgof/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <limits>

#include "sfgof/error.hpp"

namespace sfgof::quad {

namespace {

void check(double value, double error, double l1, const Options& options, const char* method) {
  if (!std::isfinite(value)) throw QuadratureError(std::string(method) + ": non-finite integral");
  // Judge the error against the L1 norm as well: an integral that cancels to
  // near zero cannot meet a purely relative target.
  const double scale = std::max(std::abs(value), 1e-6 * l1);
  if (error > std::max(100.0 * options.rel_tol * scale, options.abs_tol) + std::numeric_limits<double>::min()) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: error estimate %.3g exceeds tolerance for integral %.6g", method, error, value);
    throw QuadratureError(buf);
  }
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, Options options) {
  if (a == b) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  double value = 0.0;
  try {
    value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, options.max_depth,
                                                                         options.rel_tol, &error, &l1);
  } catch (const std::domain_error& e) {
    throw QuadratureError(std::string("gauss-kronrod: ") + e.what());
  }
  check(value, error, l1, options, "gauss-kronrod");
  return value;
}

double integrate_endpoint_singular(const std::function<double(double)>& f, double a, double b,
                                   Options options) {
  if (a == b) return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  double value = 0.0;
  try {
    value = integrator.integrate(f, a, b, options.rel_tol, &error, &l1);
  } catch (const std::domain_error& e) {
    throw QuadratureError(std::string("tanh-sinh: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw QuadratureError(std::string("tanh-sinh: ") + e.what());
  }
  check(value, error, l1, options, "tanh-sinh");
  return value;
}

}  // namespace sfgof::quad
