#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fbmdrift/rng.hpp"

namespace fbmdrift {

//! Hurst index of a fractional Brownian motion, strictly inside (0, 1).
class HurstIndex {
public:
  explicit HurstIndex(double value);
  double value() const noexcept { return value_; }

private:
  double value_;
};

enum class FbmMethod { Circulant, Cholesky };

//! fBm trajectory on the uniform grid {0, dt, ..., n dt}; values[0] == 0.
struct FbmPath {
  std::vector<double> times;
  std::vector<double> values;
  double dt = 0.0;
  HurstIndex hurst{0.5};
  std::uint64_t seed = 0;
  std::uint64_t substream = 0;

  std::size_t steps() const noexcept { return values.empty() ? 0 : values.size() - 1; }
  //! B(end) - B(begin) for grid indices begin <= end.
  double increment(std::size_t begin, std::size_t end) const { return values[end] - values[begin]; }
};

//! E[B_s B_t] = (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2.
double fbm_covariance(double s, double t, HurstIndex hurst);

//! Autocovariance of fBm increments of width dt at integer lag k.
double increment_autocovariance(long k, double dt, HurstIndex hurst);

//! Eigenvalues of the circulant embedding of the increment autocovariance.
//!
//! The returned vector has length 2m with m the smallest power of two >= n.
//! Eigenvalues in [-1e-8 * max, 0) are clamped to zero; anything more
//! negative throws ErrorCode::NegativeEigenvalue.
std::vector<double> circulant_eigenvalues(std::size_t n, double dt, HurstIndex hurst);

//! Reusable exact sampler for fBm on a fixed grid.
//!
//! Construction does the expensive work (eigenvalues or Cholesky factor);
//! sample() is const and may be called from several threads at once.
class FbmSampler {
public:
  FbmSampler(std::size_t n, double dt, HurstIndex hurst, FbmMethod method = FbmMethod::Circulant);
  ~FbmSampler();
  FbmSampler(FbmSampler&&) noexcept;
  FbmSampler& operator=(FbmSampler&&) noexcept;
  FbmSampler(const FbmSampler&) = delete;
  FbmSampler& operator=(const FbmSampler&) = delete;

  FbmPath sample(std::uint64_t seed, std::uint64_t substream = 0) const;
  //! Increments only (length n); the building block of sample().
  std::vector<double> sample_increments(RandomStream& rng) const;

  std::size_t steps() const noexcept { return n_; }
  double dt() const noexcept { return dt_; }
  HurstIndex hurst() const noexcept { return hurst_; }
  FbmMethod method() const noexcept { return method_; }

  static constexpr std::size_t kMaxCholeskySteps = 512;

private:
  struct FftState;

  std::size_t n_;
  double dt_;
  HurstIndex hurst_;
  FbmMethod method_;
  std::unique_ptr<FftState> fft_;
  Eigen::MatrixXd chol_;
};

//! Convenience wrapper: FbmSampler(n, dt, hurst, method).sample(seed).
FbmPath sample_fbm(std::size_t n, double dt, HurstIndex hurst, std::uint64_t seed,
                   FbmMethod method = FbmMethod::Circulant);

//! Grid estimate of the Hoelder coefficient sup |w_t - w_s| / |t - s|^alpha.
//!
//! All index gaps are scanned when the path has at most 4096 points;
//! otherwise gaps 1..64 plus the dyadic gaps 128, 256, ... are used, so the
//! result is a lower bound for the full grid supremum.
double holder_coefficient(std::span<const double> values, double dt, double alpha);

//! Same, with the exponent checked against the path's Hurst index.
double holder_coefficient(const FbmPath& path, double alpha);

}  // namespace fbmdrift
