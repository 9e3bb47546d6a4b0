#include <cmath>
#include <limits>
#include <vector>

#include "sfgof/error.hpp"
#include "sfgof/estimation.hpp"

namespace sfgof::est {

double log_likelihood(const RegressionModel& model, const Sample& sample, const GridOptions& grid) {
  validate(model.errors);
  const Eigen::VectorXd e = residuals(sample, model.beta);
  const std::vector<double> eps(e.data(), e.data() + e.size());
  const DensityGrid density = composed_density(model.errors, grid, eps);
  double total = 0.0;
  for (double x : eps) {
    const double f = density(x);
    if (!(f > 0.0)) return -std::numeric_limits<double>::infinity();
    total += std::log(f);
  }
  return total;
}

}  // namespace sfgof::est
