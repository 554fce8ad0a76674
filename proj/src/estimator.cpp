#include "fbmdrift/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fbmdrift/error.hpp"

namespace fbmdrift {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_config(const SamplePath& path, const EstimatorConfig& cfg) {
  if (path.grid.n < 1 || path.obs.size() != path.grid.n + 1) {
    throw Error(ErrorCode::InvalidArgument, "estimator needs n >= 1 observations");
  }
  if (!(cfg.h > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
  if (cfg.kernel.k == nullptr) throw Error(ErrorCode::InvalidArgument, "estimator config has no kernel");
  if (!(cfg.min_mass >= 0.0)) throw Error(ErrorCode::InvalidArgument, "min_mass must be nonnegative");
}

bool is_defined(double mass, double min_mass) { return mass > 0.0 && mass >= min_mass; }

void finalize(EstimateCurve& curve) {
  if (curve.defined_count() == 0) {
    throw Error(ErrorCode::EmptyCurve, "estimator undefined at every evaluation point");
  }
}

}  // namespace

std::string to_string(EstimatorMode mode) { return mode == EstimatorMode::Plain ? "plain" : "wick-oracle"; }

EstimatorMode parse_estimator_mode(const std::string& text) {
  if (text == "plain") return EstimatorMode::Plain;
  if (text == "wick-oracle" || text == "wick_oracle") return EstimatorMode::WickOracle;
  throw Error(ErrorCode::InvalidArgument, "mode must be plain or wick-oracle, got '" + text + "'");
}

std::size_t EstimateCurve::defined_count() const {
  return static_cast<std::size_t>(std::count(defined.begin(), defined.end(), char{1}));
}

double default_bandwidth(std::size_t n) { return std::pow(static_cast<double>(n), -0.2); }

std::vector<double> linspace(double lo, double hi, std::size_t points) {
  if (points == 0) return {};
  if (points == 1) return {0.5 * (lo + hi)};
  std::vector<double> xs(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) xs[i] = lo + static_cast<double>(i) * step;
  xs.back() = hi;
  return xs;
}

std::vector<double> default_x_grid(const SamplePath& path, std::size_t points) {
  std::vector<double> sorted = path.obs;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  return linspace(quantile(0.05), quantile(0.95), points);
}

double denominator_mass(const SamplePath& path, const EstimatorConfig& cfg, double x) {
  check_config(path, cfg);
  double sum = 0.0;
  for (std::size_t k = 0; k < path.grid.n; ++k) sum += scaled_kernel(cfg.kernel, cfg.h, path.obs[k] - x);
  return sum / static_cast<double>(path.grid.n);
}

namespace {

EstimateCurve estimate_impl(const SamplePath& path, const EstimatorConfig& cfg, const WickCorrector* corrector) {
  check_config(path, cfg);
  const std::size_t n = path.grid.n;
  const double alpha = path.grid.alpha_n;

  EstimateCurve curve;
  curve.x = cfg.x_grid;
  curve.b_hat.assign(cfg.x_grid.size(), kNaN);
  curve.mass.assign(cfg.x_grid.size(), 0.0);
  curve.defined.assign(cfg.x_grid.size(), 0);

  for (std::size_t i = 0; i < cfg.x_grid.size(); ++i) {
    const double x = cfg.x_grid[i];
    double weight_sum = 0.0;
    double numerator = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double u = path.obs[k] - x;
      if (std::abs(u) >= cfg.h) continue;
      const double w = scaled_kernel(cfg.kernel, cfg.h, u);
      weight_sum += w;
      numerator += w * (path.obs[k + 1] - path.obs[k]);
      if (corrector != nullptr) numerator -= corrector->correction(k, x, cfg.kernel, cfg.h);
    }
    curve.mass[i] = weight_sum / static_cast<double>(n);
    if (is_defined(curve.mass[i], cfg.min_mass)) {
      curve.defined[i] = 1;
      curve.b_hat[i] = numerator / (alpha * weight_sum);
    }
  }
  finalize(curve);
  return curve;
}

}  // namespace

EstimateCurve nw_estimate(const SamplePath& path, const EstimatorConfig& cfg, const DriftModel* model) {
  if (cfg.mode == EstimatorMode::Plain) return estimate_impl(path, cfg, nullptr);
  if (model == nullptr) throw Error(ErrorCode::InvalidArgument, "wick-oracle mode needs the drift model");
  const WickCorrector corrector(path, *model);
  return estimate_impl(path, cfg, &corrector);
}

EstimateCurve nw_estimate(const SamplePath& path, const EstimatorConfig& cfg, const WickCorrector& corrector) {
  return estimate_impl(path, cfg, cfg.mode == EstimatorMode::WickOracle ? &corrector : nullptr);
}

EstimateTerms decompose(const SamplePath& path, const DriftModel& model, const EstimatorConfig& cfg, double x) {
  if (cfg.mode == EstimatorMode::WickOracle) {
    path.require_fine();
    const WickCorrector corrector(path, model);
    return decompose(path, model, cfg, x, &corrector);
  }
  return decompose(path, model, cfg, x, nullptr);
}

EstimateTerms decompose(const SamplePath& path, const DriftModel& model, const EstimatorConfig& cfg, double x,
                        const WickCorrector* corrector) {
  check_config(path, cfg);
  path.require_fine();
  if (cfg.mode == EstimatorMode::WickOracle && corrector == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "wick-oracle decomposition needs a corrector");
  }

  const std::size_t n = path.grid.n;
  const double dt = path.fine_dt();
  const auto& fine = path.fine_values;

  double residual = 0.0, smoothed = 0.0, noise = 0.0, weight_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = path.obs[k] - x;
    if (std::abs(u) >= cfg.h) continue;
    const double w = scaled_kernel(cfg.kernel, cfg.h, u);
    const double b_k = model.b(path.obs[k]);

    double cell = 0.0;
    for (std::size_t j = path.fine_index(k); j < path.fine_index(k + 1); ++j) cell += model.b(fine[j]) - b_k;

    weight_sum += w;
    residual += w * cell * dt;
    smoothed += w * b_k;
    noise += w * path.noise_increment(k);
    if (cfg.mode == EstimatorMode::WickOracle) noise -= corrector->correction(k, x, cfg.kernel, cfg.h);
  }

  const double n_alpha = static_cast<double>(n) * path.grid.alpha_n;
  EstimateTerms terms;
  terms.drift_residual = residual / n_alpha;
  terms.smoothed_drift = smoothed / static_cast<double>(n);
  terms.noise = noise / n_alpha;
  terms.mass = weight_sum / static_cast<double>(n);
  return terms;
}

EstimateCurve nw_estimate_weighted_baseline(const SamplePath& path, const EstimatorConfig& cfg) {
  check_config(path, cfg);
  const std::size_t n = path.grid.n;
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "weighted baseline needs n >= 2");

  const double alpha = path.grid.alpha_n;
  const double t_n = path.grid.horizon();
  const double exponent = 1.0 - 2.0 * path.hurst.value();
  std::vector<double> time_weight(n);
  for (std::size_t k = 0; k < n; ++k) time_weight[k] = std::pow(t_n - path.grid.time(k), exponent);

  EstimateCurve curve;
  curve.x = cfg.x_grid;
  curve.b_hat.assign(cfg.x_grid.size(), kNaN);
  curve.mass.assign(cfg.x_grid.size(), 0.0);
  curve.defined.assign(cfg.x_grid.size(), 0);

  for (std::size_t i = 0; i < cfg.x_grid.size(); ++i) {
    const double x = cfg.x_grid[i];
    double mass = 0.0, numerator = 0.0, denominator = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double kv = cfg.kernel.k((path.obs[k] - x) / cfg.h);
      if (kv == 0.0) continue;
      mass += kv / cfg.h;
      numerator += time_weight[k] * kv * (path.obs[k + 1] - path.obs[k]);
      denominator += time_weight[k] * kv * alpha;
    }
    curve.mass[i] = mass / static_cast<double>(n);
    if (is_defined(curve.mass[i], cfg.min_mass)) {
      curve.defined[i] = 1;
      curve.b_hat[i] = numerator / denominator;
    }
  }
  finalize(curve);
  return curve;
}

double smoothing_oracle(const DriftModel& model, const Kernel& kernel, double h, double x) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
  using boost::math::quadrature::gauss_kronrod;
  auto integrand = [&](double y) { return scaled_kernel(kernel, h, y - x) * model.b(y); };
  return gauss_kronrod<double, 31>::integrate(integrand, x - h, x + h, 20, 1e-12);
}

}  // namespace fbmdrift
