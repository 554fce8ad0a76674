#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbmdrift/estimator.hpp"
#include "fbmdrift/models.hpp"
#include "fbmdrift/sde.hpp"

namespace fbmdrift {

//! Flat `key = value` configuration (TOML-style subset: comments with '#',
//! optional quotes, arrays as `[a, b, c]`).
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config(const std::string& text);
ConfigMap load_config(const std::filesystem::path& file);

//! h = c_h * n^exponent unless a fixed bandwidth is given.
struct BandwidthRule {
  double c_h = 1.0;
  double exponent = -0.2;
  std::optional<double> fixed;

  double operator()(std::size_t n) const;
};

struct XGridSpec {
  std::optional<double> x_min;
  std::optional<double> x_max;
  std::size_t points = 41;

  std::vector<double> resolve(const SamplePath& path) const;
};

struct ExperimentPlan {
  std::string drift_name = "linear";
  ParamMap drift_params{{"theta", 1.0}};
  double sigma = 0.5;
  double hurst = 0.7;
  double gamma = 2.5;
  double c_alpha = 1.0;
  double x0 = 0.0;
  std::size_t refine = 16;
  double burn_in = 20.0;
  std::string kernel_name = "biweight";
  BandwidthRule bandwidth;
  std::vector<std::size_t> n_list;
  std::size_t seeds = 1;
  std::uint64_t seed = 0;
  XGridSpec x_grid;
  EstimatorMode mode = EstimatorMode::WickOracle;
  double central_x = 0.0;
  std::filesystem::path out_dir;
  std::size_t workers = 0;  // 0: hardware concurrency

  //! Throws ErrorCode::PlanInvalid.
  void validate() const;
  nlohmann::json to_json() const;
};

//! Plan from config keys (drift.name, drift.theta, drift.a, drift.c, sigma,
//! hurst, gamma, c_alpha, x0, refine, burn_in, kernel.name, bandwidth.c_h,
//! bandwidth.exponent, bandwidth.fixed, n_list, seeds, seed, x_min, x_max,
//! x_points, mode, central_x, out, workers). Unknown keys are rejected.
ExperimentPlan plan_from_config(const ConfigMap& config);

std::size_t resolve_workers(std::size_t requested);

//! Runs fn(i) for i in [0, count) on a bounded pool; rethrows the first failure.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

struct ConsistencyRow {
  std::size_t n = 0;
  double t_n = 0.0;
  double alpha_n = 0.0;
  double h = 0.0;
  double median_sup_error = 0.0;
  double iqr_sup_error = 0.0;
  double median_l2_error = 0.0;
  double iqr_l2_error = 0.0;
  double median_sup_error_smoothed = 0.0;  // against the kernel-smoothed drift
  double iqr_sup_error_smoothed = 0.0;
  std::vector<double> sup_errors;
  std::vector<double> l2_errors;
  std::vector<double> sup_errors_smoothed;
  std::vector<std::pair<std::string, bool>> assumptions;
};

struct CurveSnapshot {
  std::size_t n = 0;
  EstimateCurve curve;
  std::vector<double> truth;
};

struct ConvergenceReport {
  std::vector<ConsistencyRow> rows;
  std::vector<CurveSnapshot> curves;  // first seed of every n
  nlohmann::json metadata;
};

ConvergenceReport run_consistency(const ExperimentPlan& plan);

struct TermDecayRow {
  std::size_t n = 0;
  double t_n = 0.0;
  double alpha_n = 0.0;
  double h = 0.0;
  double mean_abs_residual = 0.0;    // mean over seeds of |I/S|
  double median_abs_residual = 0.0;  // median over seeds of |I/S|
  double mean_noise = 0.0;           // mean of III (Wick corrected)
  double stderr_noise = 0.0;
  double second_moment_noise = 0.0;  // mean of III^2
  double mean_noise_plain = 0.0;     // mean of III without the Wick correction
  double mean_mass = 0.0;
  std::size_t used_seeds = 0;
  std::vector<double> residual_ratio;  // I/S per seed
  std::vector<double> noise;           // III per seed
  std::vector<std::pair<std::string, bool>> assumptions;
};

struct TermDecayTable {
  std::vector<TermDecayRow> rows;
  double slope_residual_vs_alpha = 0.0;       // median |I/S| against alpha_n
  double slope_residual_mean_vs_alpha = 0.0;  // mean |I/S| against alpha_n
  double slope_noise_moment_vs_horizon = 0.0; // E[III^2] against t_n
  nlohmann::json metadata;
};

//! Term I and III diagnostics at plan.central_x with a bandwidth held fixed
//! across the sweep (plan.bandwidth.fixed, or the rule at the smallest n).
TermDecayTable run_term_decay(const ExperimentPlan& plan);

enum class ReportFormat { Csv, Json, Svg };

std::string consistency_csv(const ConvergenceReport& report);
nlohmann::json consistency_json(const ConvergenceReport& report);
std::string term_decay_csv(const TermDecayTable& table);
nlohmann::json term_decay_json(const TermDecayTable& table);

//! Writes report.csv / report.json / curves_nXXXX.csv / plot_*.svg under dir.
//! Returns the written files. Throws EmptyReport or IoError.
std::vector<std::filesystem::path> emit_report(const ConvergenceReport& report, ReportFormat format,
                                               const std::filesystem::path& dir);
std::vector<std::filesystem::path> emit_report(const TermDecayTable& table, ReportFormat format,
                                               const std::filesystem::path& dir);

struct SelfTestRow {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct SelfTestOptions {
  std::size_t n = 128;
  double dt = 0.1;
  std::size_t paths = 20000;
  std::size_t normality_paths = 100;
  std::size_t normality_n = 1024;
  std::uint64_t seed = 1;
};

//! Covariance and normality checks of the fBm generators.
std::vector<SelfTestRow> fbm_selftest(HurstIndex hurst, const SelfTestOptions& options = {});

}  // namespace fbmdrift
