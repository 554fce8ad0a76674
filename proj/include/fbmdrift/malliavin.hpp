#pragma once

#include <cstddef>
#include <vector>

#include "fbmdrift/models.hpp"
#include "fbmdrift/sde.hpp"

namespace fbmdrift {

//! D_s X_t = sigma * exp(int_s^t b'(X_r) dr), trapezoid rule on the fine grid.
//! s_idx and t_idx are fine-grid indices (burn-in included), s_idx <= t_idx.
double malliavin_derivative(const SamplePath& path, const DriftModel& model, std::size_t s_idx,
                            std::size_t t_idx);

//! Malliavin derivative of the state for every pair of fine-grid nodes.
//!
//! Stores the cumulative trapezoid integral of b'(X) once; each lookup is a
//! single exp. For the linear drift the closed form sigma * e^{-theta (t - s)}
//! is used instead.
class MalliavinProfile {
public:
  enum class Method { ClosedFormLinear, Quadrature };

  MalliavinProfile(const SamplePath& path, const DriftModel& model);

  double operator()(std::size_t s_idx, std::size_t t_idx) const;
  Method method() const noexcept { return method_; }
  //! Cumulative int_0^{t_j} b'(X_r) dr on the fine grid.
  const std::vector<double>& log_sensitivity() const noexcept { return cumulative_; }

private:
  const SamplePath* path_;
  Method method_;
  double theta_ = 0.0;
  std::vector<double> cumulative_;
};

//! H (2H-1) int_{t_k}^{t_{k+1}} (t - s)^{2H-2} dt = H [(t_{k+1}-s)^{2H-1} - (t_k-s)^{2H-1}].
double hilbert_weight(double s, double t_k, double t_k1, HurstIndex hurst);

//! Integral of hilbert_weight over s in [s0, s1] with s1 <= t_k, which equals
//! Cov(B_{s1} - B_{s0}, B_{t_{k+1}} - B_{t_k}).
double hilbert_cell_weight(double s0, double s1, double t_k, double t_k1, HurstIndex hurst);

//! Wick correction of the kernel-weighted noise increments of one path.
//!
//! For F = K_h(X_{t_k} - x) the Wick product with sigma dB over [t_k, t_{k+1}]
//! is F * sigma dB - sigma K_h'(X_{t_k} - x) * C_k, where
//!
//!   C_k = sum_j D_{s_j} X_{t_k} * Cov(B_{s_j} - B_{s_{j-1}}, B_{t_{k+1}} - B_{t_k})
//!
//! runs over every fine cell [s_{j-1}, s_j] before t_k (burn-in included).
//! C_k does not depend on x, K or h, so it is computed once per path.
class WickCorrector {
public:
  WickCorrector(const SamplePath& path, const DriftModel& model);

  //! C_k, computed on demand and cached.
  double coefficient(std::size_t k) const;
  const std::vector<double>& coefficients() const;

  //! sigma * K_h'(X_{t_k} - x) * C_k.
  double correction(std::size_t k, double x, const Kernel& kernel, double h) const;

  const SamplePath& path() const noexcept { return *path_; }

private:
  double compute(std::size_t k) const;

  const SamplePath* path_;
  bool truncate_;
  std::vector<double> cumulative_;   // cumulative int b'(X) on the fine grid
  std::vector<double> chunk_factor_; // exp(A_end(chunk) - A_j)
  std::vector<double> cov_reversed_; // Cov table G[m], stored reversed
  mutable std::vector<double> cache_;
  mutable std::vector<char> cached_;
};

//! K_h(X_{t_k} - x) (X_{t_{k+1}} - X_{t_k}) minus the Wick correction.
double wick_increment(const SamplePath& path, std::size_t k, double x, const Kernel& kernel, double h,
                      const DriftModel& model);

}  // namespace fbmdrift
