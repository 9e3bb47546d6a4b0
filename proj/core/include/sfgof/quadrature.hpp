#pragma once

// Adaptive quadrature wrappers. Failures to reach the requested tolerance
// raise QuadratureError instead of returning a silently poor value.

#include <functional>

namespace sfgof::quad {

struct Options {
  double rel_tol = 1e-12;
  /// Absolute error that is always acceptable, for pieces of a larger integral.
  double abs_tol = 0.0;
  unsigned max_depth = 18;
};

/// Adaptive Gauss-Kronrod (61 point) on [a, b]; b may be +infinity.
double integrate(const std::function<double(double)>& f, double a, double b, Options options = {});

/// Tanh-sinh on a finite interval, for integrands with endpoint singularities.
double integrate_endpoint_singular(const std::function<double(double)>& f, double a, double b,
                                   Options options = {});

}  // namespace sfgof::quad
