#include "fbmdrift/malliavin.hpp"

#include <algorithm>
#include <cmath>

#include "fbmdrift/error.hpp"

namespace fbmdrift {

namespace {

constexpr std::size_t kChunk = 512;
constexpr double kTruncation = 1e-17;

std::vector<double> cumulative_log_sensitivity(const SamplePath& path, const DriftModel& model) {
  const auto& x = path.fine_values;
  const double dt = path.fine_dt();
  std::vector<double> acc(x.size(), 0.0);
  double prev = model.b_prime(x[0]);
  for (std::size_t j = 1; j < x.size(); ++j) {
    const double cur = model.b_prime(x[j]);
    acc[j] = acc[j - 1] + 0.5 * (prev + cur) * dt;
    prev = cur;
  }
  return acc;
}

// ((x+1)^{2H} - x^{2H}) / 2 without cancellation for large x.
double half_forward_difference(double x, double two_h) {
  if (x == 0.0) return 0.5;
  return 0.5 * std::pow(x, two_h) * std::expm1(two_h * std::log1p(1.0 / x));
}

}  // namespace

double malliavin_derivative(const SamplePath& path, const DriftModel& model, std::size_t s_idx,
                            std::size_t t_idx) {
  path.require_fine();
  if (s_idx > t_idx || t_idx >= path.fine_values.size()) {
    throw Error(ErrorCode::InvalidArgument, "malliavin derivative needs s_idx <= t_idx within the fine grid");
  }
  const double dt = path.fine_dt();
  double integral = 0.0;
  for (std::size_t j = s_idx; j < t_idx; ++j) {
    integral += 0.5 * (model.b_prime(path.fine_values[j]) + model.b_prime(path.fine_values[j + 1])) * dt;
  }
  return path.sigma * std::exp(integral);
}

MalliavinProfile::MalliavinProfile(const SamplePath& path, const DriftModel& model)
    : path_(&path), method_(Method::Quadrature) {
  path.require_fine();
  if (model.name == "linear") {
    method_ = Method::ClosedFormLinear;
    theta_ = model.params.at("theta");
  }
  cumulative_ = cumulative_log_sensitivity(path, model);
}

double MalliavinProfile::operator()(std::size_t s_idx, std::size_t t_idx) const {
  if (s_idx > t_idx || t_idx >= cumulative_.size()) {
    throw Error(ErrorCode::InvalidArgument, "malliavin profile needs s_idx <= t_idx within the fine grid");
  }
  if (method_ == Method::ClosedFormLinear) {
    return path_->sigma * std::exp(-theta_ * static_cast<double>(t_idx - s_idx) * path_->fine_dt());
  }
  return path_->sigma * std::exp(cumulative_[t_idx] - cumulative_[s_idx]);
}

double hilbert_weight(double s, double t_k, double t_k1, HurstIndex hurst) {
  const double e = 2.0 * hurst.value() - 1.0;
  return hurst.value() * (std::pow(t_k1 - s, e) - std::pow(t_k - s, e));
}

double hilbert_cell_weight(double s0, double s1, double t_k, double t_k1, HurstIndex hurst) {
  const double two_h = 2.0 * hurst.value();
  auto p = [two_h](double v) { return std::pow(v, two_h); };
  return 0.5 * (p(t_k1 - s0) - p(t_k1 - s1) - p(t_k - s0) + p(t_k - s1));
}

WickCorrector::WickCorrector(const SamplePath& path, const DriftModel& model)
    : path_(&path), truncate_(model.dissipativity_M.has_value()) {
  path.require_fine();
  if (!model.b_prime) throw Error(ErrorCode::InvalidArgument, "wick correction needs b'");
  if (path.hurst.value() <= 0.5) {
    throw Error(ErrorCode::InvalidArgument, "wick correction requires H > 1/2");
  }

  cumulative_ = cumulative_log_sensitivity(path, model);
  const std::size_t total = cumulative_.size() - 1;

  chunk_factor_.resize(total + 1);
  for (std::size_t j = 0; j <= total; ++j) {
    const std::size_t end = std::min((j / kChunk + 1) * kChunk - 1, total);
    chunk_factor_[j] = std::exp(cumulative_[end] - cumulative_[j]);
  }

  // G[m] = Cov of the fine cell ending m steps before t_k with the coarse
  // increment over [t_k, t_k + r dt]; depends on m only.
  const double two_h = 2.0 * path.hurst.value();
  const double scale = std::pow(path.fine_dt(), two_h);
  const auto r = static_cast<double>(path.refine);
  cov_reversed_.resize(total + 1);
  for (std::size_t m = 0; m <= total; ++m) {
    const double md = static_cast<double>(m);
    const double g = scale * (half_forward_difference(md + r, two_h) - half_forward_difference(md, two_h));
    cov_reversed_[total - m] = g;
  }

  cache_.assign(path.grid.n, 0.0);
  cached_.assign(path.grid.n, 0);
}

double WickCorrector::compute(std::size_t k) const {
  const auto& a = cumulative_;
  const std::size_t total = a.size() - 1;
  const std::size_t t_idx = path_->fine_index(k);
  if (t_idx == 0) return 0.0;

  // G[t_idx - j] lives at cov_reversed_[total - t_idx + j].
  const double* g = cov_reversed_.data() + (total - t_idx);

  double sum = 0.0;
  const std::size_t first_chunk = t_idx / kChunk;
  const std::size_t head_begin = std::max<std::size_t>(first_chunk * kChunk, 1);
  for (std::size_t j = head_begin; j <= t_idx; ++j) sum += std::exp(a[t_idx] - a[j]) * g[j];

  for (std::size_t c = first_chunk; c-- > 0;) {
    const std::size_t begin = std::max<std::size_t>(c * kChunk, 1);
    const std::size_t end = (c + 1) * kChunk;  // exclusive; end - 1 is the chunk anchor
    const double chunk_scale = std::exp(a[t_idx] - a[end - 1]);
    if (truncate_ && chunk_scale < kTruncation) break;
    double partial = 0.0;
    const double* f = chunk_factor_.data();
    for (std::size_t j = begin; j < end; ++j) partial += f[j] * g[j];
    sum += chunk_scale * partial;
  }
  return path_->sigma * sum;
}

double WickCorrector::coefficient(std::size_t k) const {
  if (k >= cache_.size()) throw Error(ErrorCode::InvalidArgument, "coarse index out of range");
  if (!cached_[k]) {
    cache_[k] = compute(k);
    cached_[k] = 1;
  }
  return cache_[k];
}

const std::vector<double>& WickCorrector::coefficients() const {
  for (std::size_t k = 0; k < cache_.size(); ++k) coefficient(k);
  return cache_;
}

double WickCorrector::correction(std::size_t k, double x, const Kernel& kernel, double h) const {
  const double u = path_->obs[k] - x;
  if (std::abs(u) >= h) return 0.0;
  return path_->sigma * scaled_kernel_derivative(kernel, h, u) * coefficient(k);
}

double wick_increment(const SamplePath& path, std::size_t k, double x, const Kernel& kernel, double h,
                      const DriftModel& model) {
  path.require_fine();
  if (k >= path.grid.n) throw Error(ErrorCode::InvalidArgument, "coarse index out of range");
  const double u = path.obs[k] - x;
  const double plain = scaled_kernel(kernel, h, u) * (path.obs[k + 1] - path.obs[k]);
  if (std::abs(u) >= h || path.sigma == 0.0) return plain;
  const WickCorrector corrector(path, model);
  return plain - corrector.correction(k, x, kernel, h);
}

}  // namespace fbmdrift
