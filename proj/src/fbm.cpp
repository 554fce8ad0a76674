#include "fbmdrift/fbm.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include <fftw3.h>

#include "fbmdrift/error.hpp"

namespace fbmdrift {

namespace {

// The FFTW planner is not reentrant; execution of an existing plan is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t embedding_half_size(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t size)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size))) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

}  // namespace

HurstIndex::HurstIndex(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "hurst index must lie in (0, 1), got " + std::to_string(value));
  }
}

double fbm_covariance(double s, double t, HurstIndex hurst) {
  const double two_h = 2.0 * hurst.value();
  return 0.5 * (std::pow(std::abs(t), two_h) + std::pow(std::abs(s), two_h) -
                std::pow(std::abs(t - s), two_h));
}

double increment_autocovariance(long k, double dt, HurstIndex hurst) {
  const double two_h = 2.0 * hurst.value();
  const double kk = std::abs(static_cast<double>(k));
  const double lag_part =
      std::pow(kk + 1.0, two_h) - 2.0 * std::pow(kk, two_h) + std::pow(std::abs(kk - 1.0), two_h);
  return 0.5 * std::pow(dt, two_h) * lag_part;
}

std::vector<double> circulant_eigenvalues(std::size_t n, double dt, HurstIndex hurst) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "circulant embedding needs n >= 1");
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");

  const std::size_t m = embedding_half_size(n);
  const std::size_t size = 2 * m;

  // First row of the circulant: gamma(0..m), then gamma(m-1..1).
  std::vector<double> row(size);
  for (std::size_t k = 0; k <= m; ++k) row[k] = increment_autocovariance(static_cast<long>(k), dt, hurst);
  for (std::size_t k = m + 1; k < size; ++k) row[k] = row[size - k];

  std::vector<double> eig(size);
  {
    FftwBuffer out(m + 1);
    fftw_plan plan;
    {
      std::lock_guard lock(fftw_planner_mutex());
      plan = fftw_plan_dft_r2c_1d(static_cast<int>(size), row.data(), out.data, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    for (std::size_t k = 0; k <= m; ++k) eig[k] = out.data[k][0];
    for (std::size_t k = m + 1; k < size; ++k) eig[k] = eig[size - k];
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  const double max_eig = *std::max_element(eig.begin(), eig.end());
  const double tol = 1e-8 * max_eig;
  for (auto& lambda : eig) {
    if (lambda < -tol) {
      throw Error(ErrorCode::NegativeEigenvalue,
                  "circulant embedding has eigenvalue " + std::to_string(lambda));
    }
    if (lambda < 0.0) lambda = 0.0;
  }
  return eig;
}

struct FbmSampler::FftState {
  std::size_t size = 0;
  std::vector<double> scale;  // sqrt(lambda_k / size)
  fftw_plan plan = nullptr;

  ~FftState() {
    if (plan != nullptr) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

FbmSampler::FbmSampler(std::size_t n, double dt, HurstIndex hurst, FbmMethod method)
    : n_(n), dt_(dt), hurst_(hurst), method_(method) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "fbm sampler needs n >= 1");
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");

  if (method == FbmMethod::Cholesky) {
    if (n > kMaxCholeskySteps) {
      throw Error(ErrorCode::InvalidArgument, "cholesky sampling is limited to n <= 512");
    }
    Eigen::MatrixXd cov(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        const double c = fbm_covariance(static_cast<double>(i + 1) * dt, static_cast<double>(j + 1) * dt, hurst);
        cov(i, j) = c;
        cov(j, i) = c;
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::InvalidArgument, "fbm covariance matrix is not positive definite");
    }
    chol_ = llt.matrixL();
    return;
  }

  const auto eig = circulant_eigenvalues(n, dt, hurst);
  fft_ = std::make_unique<FftState>();
  fft_->size = eig.size();
  fft_->scale.resize(eig.size());
  const double norm = static_cast<double>(eig.size());
  std::transform(eig.begin(), eig.end(), fft_->scale.begin(),
                 [norm](double lambda) { return std::sqrt(lambda / norm); });

  FftwBuffer in(fft_->size), out(fft_->size);
  std::lock_guard lock(fftw_planner_mutex());
  fft_->plan = fftw_plan_dft_1d(static_cast<int>(fft_->size), in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE);
}

FbmSampler::~FbmSampler() = default;
FbmSampler::FbmSampler(FbmSampler&&) noexcept = default;
FbmSampler& FbmSampler::operator=(FbmSampler&&) noexcept = default;

std::vector<double> FbmSampler::sample_increments(RandomStream& rng) const {
  std::vector<double> inc(n_);

  if (method_ == FbmMethod::Cholesky) {
    Eigen::VectorXd z(static_cast<Eigen::Index>(n_));
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    const Eigen::VectorXd b = chol_.triangularView<Eigen::Lower>() * z;
    double prev = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      inc[i] = b[static_cast<Eigen::Index>(i)] - prev;
      prev = b[static_cast<Eigen::Index>(i)];
    }
    return inc;
  }

  const std::size_t size = fft_->size;
  FftwBuffer in(size), out(size);
  for (std::size_t k = 0; k < size; ++k) {
    const double re = rng.normal();
    const double im = rng.normal();
    in.data[k][0] = fft_->scale[k] * re;
    in.data[k][1] = fft_->scale[k] * im;
  }
  fftw_execute_dft(fft_->plan, in.data, out.data);
  for (std::size_t i = 0; i < n_; ++i) inc[i] = out.data[i][0];
  return inc;
}

FbmPath FbmSampler::sample(std::uint64_t seed, std::uint64_t substream) const {
  RandomStream rng(seed, substream);
  const auto inc = sample_increments(rng);

  FbmPath path;
  path.dt = dt_;
  path.hurst = hurst_;
  path.seed = seed;
  path.substream = substream;
  path.times.resize(n_ + 1);
  path.values.resize(n_ + 1);
  path.values[0] = 0.0;
  for (std::size_t i = 0; i <= n_; ++i) path.times[i] = static_cast<double>(i) * dt_;
  for (std::size_t i = 0; i < n_; ++i) path.values[i + 1] = path.values[i] + inc[i];
  return path;
}

FbmPath sample_fbm(std::size_t n, double dt, HurstIndex hurst, std::uint64_t seed, FbmMethod method) {
  return FbmSampler(n, dt, hurst, method).sample(seed);
}

double holder_coefficient(std::span<const double> values, double dt, double alpha) {
  if (values.size() < 2) throw Error(ErrorCode::InvalidArgument, "hoelder coefficient needs >= 2 points");
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidExponent, "hoelder exponent must be positive");

  const std::size_t count = values.size();
  std::vector<std::size_t> gaps;
  if (count <= 4096) {
    for (std::size_t g = 1; g < count; ++g) gaps.push_back(g);
  } else {
    for (std::size_t g = 1; g <= 64; ++g) gaps.push_back(g);
    for (std::size_t g = 128; g < count; g <<= 1) gaps.push_back(g);
  }

  double best = 0.0;
  for (std::size_t g : gaps) {
    double max_diff = 0.0;
    for (std::size_t i = 0; i + g < count; ++i) {
      max_diff = std::max(max_diff, std::abs(values[i + g] - values[i]));
    }
    best = std::max(best, max_diff / std::pow(static_cast<double>(g) * dt, alpha));
  }
  return best;
}

double holder_coefficient(const FbmPath& path, double alpha) {
  if (!(alpha > 0.0) || alpha >= path.hurst.value()) {
    throw Error(ErrorCode::InvalidExponent, "hoelder exponent must satisfy 0 < alpha < H");
  }
  return holder_coefficient(path.values, path.dt, alpha);
}

}  // namespace fbmdrift
