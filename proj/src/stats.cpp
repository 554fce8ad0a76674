#include "fbmdrift/stats.hpp"

#include <algorithm>
#include <cmath>

#include "fbmdrift/error.hpp"

namespace fbmdrift::stats {

namespace {

void require(std::span<const double> xs, std::size_t min_size) {
  if (xs.size() < min_size) throw Error(ErrorCode::InvalidArgument, "not enough samples");
}

}  // namespace

double mean(std::span<const double> xs) {
  require(xs, 1);
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  require(xs, 2);
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

double standard_error(std::span<const double> xs) {
  return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

double quantile(std::span<const double> xs, double q) {
  require(xs, 1);
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double median(std::span<const double> xs) { return quantile(xs, 0.5); }

double iqr(std::span<const double> xs) { return quantile(xs, 0.75) - quantile(xs, 0.25); }

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "ols_slope: size mismatch");
  require(x, 2);
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double lag1_autocorrelation(std::span<const double> xs) {
  require(xs, 3);
  const double m = mean(xs);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    den += (xs[i] - m) * (xs[i] - m);
    if (i + 1 < xs.size()) num += (xs[i] - m) * (xs[i + 1] - m);
  }
  return num / den;
}

NormalityTest anderson_darling(std::span<const double> xs) {
  require(xs, 8);
  const auto n = static_cast<double>(xs.size());
  const double m = mean(xs);
  const double s = std::sqrt(variance(xs));

  std::vector<double> z(xs.begin(), xs.end());
  std::sort(z.begin(), z.end());
  auto log_cdf = [](double v) { return std::log(std::max(0.5 * std::erfc(-v / std::sqrt(2.0)), 1e-300)); };
  auto log_sf = [](double v) { return std::log(std::max(0.5 * std::erfc(v / std::sqrt(2.0)), 1e-300)); };

  double acc = 0.0;
  const std::size_t count = z.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double zi = (z[i] - m) / s;
    const double zr = (z[count - 1 - i] - m) / s;
    acc += (2.0 * static_cast<double>(i) + 1.0) * (log_cdf(zi) + log_sf(zr));
  }
  const double a2 = -n - acc / n;

  NormalityTest result;
  result.statistic = a2 * (1.0 + 0.75 / n + 2.25 / (n * n));
  // D'Agostino & Stephens (1986) p-value approximation for the case of
  // estimated mean and variance.
  const double a = result.statistic;
  if (a >= 0.6) {
    result.p_value = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
  } else if (a >= 0.34) {
    result.p_value = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
  } else if (a >= 0.2) {
    result.p_value = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
  } else {
    result.p_value = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
  }
  result.p_value = std::clamp(result.p_value, 0.0, 1.0);
  return result;
}

}  // namespace fbmdrift::stats
