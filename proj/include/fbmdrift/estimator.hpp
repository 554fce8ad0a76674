#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fbmdrift/malliavin.hpp"
#include "fbmdrift/models.hpp"
#include "fbmdrift/sde.hpp"

namespace fbmdrift {

enum class EstimatorMode { Plain, WickOracle };

std::string to_string(EstimatorMode mode);
EstimatorMode parse_estimator_mode(const std::string& text);

struct EstimatorConfig {
  Kernel kernel;
  double h = 0.0;
  EstimatorMode mode = EstimatorMode::Plain;
  std::vector<double> x_grid;
  double min_mass = 1e-6;
};

//! The three numerator terms and the denominator of the estimator at one x:
//! b_hat(x) = (I + II + III) / S.
struct EstimateTerms {
  double drift_residual = 0.0;  // I
  double smoothed_drift = 0.0;  // II
  double noise = 0.0;           // III
  double mass = 0.0;            // S

  double estimate() const { return (drift_residual + smoothed_drift + noise) / mass; }
};

struct EstimateCurve {
  std::vector<double> x;
  std::vector<double> b_hat;  // NaN where undefined
  std::vector<double> mass;
  std::vector<char> defined;
  std::optional<std::vector<EstimateTerms>> terms;

  std::size_t defined_count() const;
};

//! Default bandwidth n^{-1/5}.
double default_bandwidth(std::size_t n);

//! `points` equispaced values spanning the 5%..95% quantiles of the observations.
std::vector<double> default_x_grid(const SamplePath& path, std::size_t points = 41);

std::vector<double> linspace(double lo, double hi, std::size_t points);

//! S_{n,h}(x) = (1/n) sum_{k<n} K_h(X_{t_k} - x).
double denominator_mass(const SamplePath& path, const EstimatorConfig& cfg, double x);

//! Nadaraya-Watson drift estimate on cfg.x_grid.
//!
//! Plain mode uses observations only. WickOracle mode subtracts the Wick
//! correction of the noise increments and therefore needs the fine grid and
//! the true drift (pass either `model` or a prebuilt corrector).
EstimateCurve nw_estimate(const SamplePath& path, const EstimatorConfig& cfg, const DriftModel* model = nullptr);
EstimateCurve nw_estimate(const SamplePath& path, const EstimatorConfig& cfg, const WickCorrector& corrector);

//! Terms I, II, III and S at x, computed from the fine grid and the true drift.
EstimateTerms decompose(const SamplePath& path, const DriftModel& model, const EstimatorConfig& cfg, double x);
EstimateTerms decompose(const SamplePath& path, const DriftModel& model, const EstimatorConfig& cfg, double x,
                        const WickCorrector* corrector);

//! Comparison estimator with weights (t_n - t_k)^{1-2H} in numerator and denominator.
EstimateCurve nw_estimate_weighted_baseline(const SamplePath& path, const EstimatorConfig& cfg);

//! int K_h(y - x) b(y) dy over [x - h, x + h] (adaptive Gauss-Kronrod).
double smoothing_oracle(const DriftModel& model, const Kernel& kernel, double h, double x);

}  // namespace fbmdrift
