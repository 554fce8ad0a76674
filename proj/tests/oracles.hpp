#pragma once

// Independent reference computations for the test suite. None of these call
// into the library's numerical kernels; they recompute the same quantities
// by brute force so that agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

inline double increment_acov(long k, double dt, double H) {
  const double a = std::abs(static_cast<double>(k));
  const double two_h = 2.0 * H;
  return 0.5 * std::pow(dt, two_h) * (std::pow(a + 1.0, two_h) - 2.0 * std::pow(a, two_h) + std::pow(std::abs(a - 1.0), two_h));
}

// Eigenvalues of the 2m x 2m circulant matrix, by dense symmetric eigensolver.
inline std::vector<double> dense_circulant_eigenvalues(std::size_t n, double dt, double H) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  const std::size_t size = 2 * m;
  std::vector<double> row(size);
  for (std::size_t j = 0; j <= m; ++j) row[j] = increment_acov(static_cast<long>(j), dt, H);
  for (std::size_t j = m + 1; j < size; ++j) row[j] = row[size - j];
  Eigen::MatrixXd c(size, size);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) c(i, j) = row[(j + size - i) % size];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
  std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + size);
  std::sort(out.begin(), out.end());
  return out;
}

// Composite midpoint rule.
inline double midpoint(const std::function<double(double)>& f, double a, double b, std::size_t cells) {
  const double w = (b - a) / static_cast<double>(cells);
  double sum = 0.0;
  for (std::size_t i = 0; i < cells; ++i) sum += f(a + (static_cast<double>(i) + 0.5) * w);
  return sum * w;
}

// H(2H-1) int_{s0}^{s1} f(s) int_{t0}^{t1} (t - s)^{2H-2} dt ds by nested
// tanh-sinh quadrature (handles the integrable singularity at s = t = t0).
inline double fractional_double_integral(const std::function<double(double)>& f, double s0, double s1,
                                         double t0, double t1, double H) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double c = H * (2.0 * H - 1.0);
  auto inner = [&](double s) {
    auto g = [&](double t) { return std::pow(t - s, 2.0 * H - 2.0); };
    return integrator.integrate(g, t0, t1);
  };
  auto outer = [&](double s) { return f(s) * inner(s); };
  return c * integrator.integrate(outer, s0, s1);
}

// int_{t_s}^{t_t} b'(X_r) dr with X piecewise linear between fine nodes;
// Simpson on each cell (exact when b' is quadratic in x).
inline double integral_on_interpolant(const std::vector<double>& x, std::size_t s_idx, std::size_t t_idx, double dt,
                                      const std::function<double(double)>& b_prime) {
  double sum = 0.0;
  for (std::size_t j = s_idx; j < t_idx; ++j) {
    const double mid = 0.5 * (x[j] + x[j + 1]);
    sum += dt / 6.0 * (b_prime(x[j]) + 4.0 * b_prime(mid) + b_prime(x[j + 1]));
  }
  return sum;
}

// Plain Nadaraya-Watson ratio recomputed from scratch.
inline double nw_plain(const std::vector<double>& obs, double alpha, double x, double h,
                       const std::function<double(double)>& kernel) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k + 1 < obs.size(); ++k) {
    const double w = kernel((obs[k] - x) / h);
    num += w * (obs[k + 1] - obs[k]) / alpha;
    den += w;
  }
  return num / den;
}

inline double biweight(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double v = 1.0 - u * u;
  return 15.0 / 16.0 * v * v;
}

}  // namespace oracle
