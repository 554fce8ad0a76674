#pragma once

#include <string>

#include "fbmdrift/models.hpp"
#include "fbmdrift/sde.hpp"

namespace fbmdrift {

//! Test function phi for ergodic averages with |phi| + |phi'| <= C_phi (1 + |x|^p).
struct TestFunction {
  std::string name;
  RealFunction phi;
  RealFunction phi_prime;
  double growth_C = 1.0;
  int degree_p = 0;
};

/// Registered names: one, identity, square.
TestFunction builtin_test_function(const std::string& name);

//! (1/t_n) int_0^{t_n} phi(X_s) ds, trapezoid rule on the fine grid.
double time_average(const SamplePath& path, const TestFunction& phi);

//! (1/n) sum_{k<n} phi(X_{t_k}), the step-function average over [0, t_n).
double step_average(const SamplePath& path, const TestFunction& phi);

//! Stationary variance sigma^2 H Gamma(2H) theta^{-2H} of the fractional OU process.
double fou_stationary_variance(double theta, double sigma, HurstIndex hurst);

//! Rate condition under which the step average is covered by the ergodic theorem:
//! gamma > 1 + (m^2 + p) H and gamma > p + 1.
bool ergodic_theorem_covers(double gamma, int m, int p, HurstIndex hurst);

struct ErgodicCheck {
  std::string phi;
  double estimate_step = 0.0;
  double estimate_time = 0.0;
  double reference = 0.0;
  bool covered_by_theorem = false;
};

struct ErgodicSetup {
  DriftModel model;
  double sigma = 0.5;
  double x0 = 0.0;
  HurstIndex hurst{0.7};
  ObservationGrid grid;
  SimulationOptions options;
};

//! Reference value of E phi(X-bar). Closed form for the linear model with
//! phi in {one, identity, square}; otherwise the pooled time average of 10
//! independent paths over a window 10 times longer (substreams 1000..1009).
double ergodic_reference(const ErgodicSetup& setup, const TestFunction& phi, std::uint64_t seed);

//! Simulates one path (substream 0) and compares both averages with the reference.
ErgodicCheck ergodic_check(const ErgodicSetup& setup, const TestFunction& phi, std::uint64_t seed);

}  // namespace fbmdrift
