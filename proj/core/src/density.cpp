#include <fftw3.h>

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "sfgof/error.hpp"
#include "sfgof/estimation.hpp"

namespace sfgof::est {

namespace {

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

FftwBuffer allocate(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer(p);
}

// FFTW planning is not thread-safe; plans are made once per length and reused
// through the new-array execute interface, which is.
fftw_plan forward_plan(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  auto in = allocate(n);
  auto out = allocate(n);
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), in.get(), out.get(), FFTW_FORWARD, FFTW_ESTIMATE);
  if (plan == nullptr) throw NumericalError("FFTW could not create a plan of length " + std::to_string(n));
  plans.emplace(n, plan);
  return plan;
}

bool is_power_of_two(std::size_t n) { return n >= 4 && (n & (n - 1)) == 0; }

}  // namespace

double DensityGrid::operator()(double x) const {
  if (points.empty() || !(x >= lower()) || !(x <= upper())) return 0.0;
  const double pos = (x - lower()) / spacing;
  auto i = static_cast<std::size_t>(pos);
  if (i >= points.size() - 1) return values.back();
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * values[i] + w * values[i + 1];
}

double DensityGrid::mass() const {
  if (values.size() < 2) return 0.0;
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
  return s * spacing;
}

DensityGrid cf_inversion_density(const CharacteristicFunction& cf, std::size_t n_points, double lower,
                                 double upper, InversionOptions options) {
  if (!is_power_of_two(n_points)) {
    throw ConfigError("density grid size must be a power of two >= 4, got " + std::to_string(n_points));
  }
  if (!(upper > lower) || !std::isfinite(lower) || !std::isfinite(upper)) {
    throw ConfigError("density window must be a finite interval with upper > lower");
  }
  // x_k = center + (k - N/2) h_x, t_j = (j - N/2) h_t with h_x h_t = 2 pi / N. Then
  //   f(x_k) = (h_t / 2 pi) sum_j phi(t_j) e^{-i t_j x_k}
  //          = (1 / 2L) (-1)^k DFT_k[(-1)^j phi(t_j) e^{-i t_j center}],
  // L being the half width of the window.
  const std::size_t n = n_points;
  const double half = 0.5 * (upper - lower);
  const double center = lower + half;
  const double h_t = std::numbers::pi / half;
  const double h_x = 2.0 * half / static_cast<double>(n);
  auto in = allocate(n);
  auto out = allocate(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (static_cast<double>(j) - 0.5 * static_cast<double>(n)) * h_t;
    std::complex<double> z = cf(t) * std::polar(1.0, -t * center);
    if (j % 2 == 1) z = -z;
    in[j][0] = z.real();
    in[j][1] = z.imag();
  }
  fftw_execute_dft(forward_plan(n), in.get(), out.get());
  DensityGrid grid;
  grid.spacing = h_x;
  grid.points.resize(n);
  grid.values.resize(n);
  const double scale = 1.0 / (2.0 * half);
  double peak = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    grid.points[k] = center + (static_cast<double>(k) - 0.5 * static_cast<double>(n)) * h_x;
    const double v = (k % 2 == 1 ? -scale : scale) * out[k][0];
    grid.values[k] = v > 0.0 ? v : 0.0;
    peak = std::max(peak, grid.values[k]);
  }
  if (!(peak > 0.0) || !std::isfinite(peak)) throw ConfigError("inverted density is identically zero");
  const double edge = std::max(grid.values.front(), grid.values.back());
  if (edge > options.boundary_tol * peak) {
    throw ConfigError("density window too narrow: boundary density " + std::to_string(edge / peak) +
                      " of the peak");
  }
  const double mass = grid.mass();
  if (std::abs(mass - 1.0) > options.mass_tol) {
    throw ConfigError("inverted density has mass " + std::to_string(mass) + "; refine the grid");
  }
  return grid;
}

DensityGrid cf_inversion_density(const CharacteristicFunction& cf, std::size_t n_points, double span,
                                 InversionOptions options) {
  if (!(span > 0.0)) throw ConfigError("density span must be positive");
  return cf_inversion_density(cf, n_points, -span, span, options);
}

std::pair<double, double> default_window(const ErrorParams& params) {
  validate(params);
  const double p = inefficiency_shape(params);
  const double c = inefficiency_scale(params);
  const double u_tail = c * boost::math::gamma_q_inv(p, 1e-13);
  if (const auto* ng = std::get_if<NormalGammaParams>(&params)) {
    const double w = 10.0 * std::sqrt(ng->sigma_v2);
    return {-u_tail - w, w};
  }
  const auto& sg = std::get<StableGammaParams>(params);
  const double w = sg.kappa * std::pow(10.0, 5.0 / (1.0 + sg.alpha));
  return {-u_tail - w, w};
}

DensityGrid composed_density(const ErrorParams& params, const GridOptions& grid,
                             const std::vector<double>& cover) {
  auto [lower, upper] = default_window(params);
  if (grid.lower) lower = *grid.lower;
  if (grid.upper) upper = *grid.upper;
  if (!grid.lower && !grid.upper && !cover.empty()) {
    const auto [lo, hi] = std::minmax_element(cover.begin(), cover.end());
    const double margin = 0.01 * (upper - lower);
    lower = std::min(lower, *lo - margin);
    upper = std::max(upper, *hi + margin);
  }
  InversionOptions options;
  if (family_of(params) == Family::stable_gamma) {
    // Stable tails decay polynomially; the window edge is judged more loosely.
    options.boundary_tol = 1e-3;
    options.mass_tol = 2e-3;
  } else {
    options.boundary_tol = 1e-8;
  }
  return cf_inversion_density([&](double t) { return cf_composed(params, t); }, grid.n_points, lower, upper,
                              options);
}

}  // namespace sfgof::est
