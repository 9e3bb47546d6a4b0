#include <cmath>
#include <string>

#include "sfgof/error.hpp"
#include "sfgof/estimation.hpp"

namespace sfgof::est {

OlsFit ols(const Sample& sample) {
  if (sample.y.size() != sample.x.rows()) throw ValidationError("design and response lengths differ");
  if (sample.x.cols() < 1 || sample.x.rows() < sample.x.cols()) {
    throw ValidationError("OLS needs at least as many observations as columns");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sample.x);
  if (qr.rank() < sample.x.cols()) {
    throw RankDeficientError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) + ")");
  }
  OlsFit fit;
  fit.beta = qr.solve(sample.y);
  fit.residuals = sample.y - sample.x * fit.beta;
  return fit;
}

std::optional<Eigen::Index> intercept_column(const Eigen::MatrixXd& x) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double first = x(0, j);
    if (first != 0.0 && (x.col(j).array() == first).all()) return j;
  }
  return std::nullopt;
}

}  // namespace sfgof::est
