#include "fbmdrift/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "fbmdrift/error.hpp"
#include "fbmdrift/io.hpp"
#include "fbmdrift/malliavin.hpp"
#include "fbmdrift/stats.hpp"

namespace fbmdrift {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

double to_double(const ConfigMap& c, const std::string& key, double fallback) {
  auto it = c.find(key);
  if (it == c.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::PlanInvalid, "config key '" + key + "' is not a number: " + it->second);
  }
}

std::uint64_t to_uint(const ConfigMap& c, const std::string& key, std::uint64_t fallback) {
  auto it = c.find(key);
  if (it == c.end()) return fallback;
  try {
    std::size_t used = 0;
    if (!it->second.empty() && it->second.front() == '-') throw std::invalid_argument(key);
    const auto v = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::PlanInvalid, "config key '" + key + "' is not a nonnegative integer: " + it->second);
  }
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::string body = trim(text);
  if (!body.empty() && body.front() == '[') body = body.substr(1);
  if (!body.empty() && body.back() == ']') body.pop_back();
  std::vector<std::size_t> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::PlanInvalid, "n_list entry is not an integer: " + item);
    }
  }
  return out;
}

template <typename T>
std::vector<double> as_doubles(const std::vector<T>& v) {
  return std::vector<double>(v.begin(), v.end());
}

std::vector<double> log_of(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::log(x); });
  return out;
}

nlohmann::json flags_json(const std::vector<std::pair<std::string, bool>>& flags) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, ok] : flags) j[name] = ok;
  return j;
}

std::string pad_n(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", n);
  return buf;
}

}  // namespace

ConfigMap parse_config(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::PlanInvalid, "config line " + std::to_string(lineno) + " has no '='");
    }
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    out[key] = unquote(trim(line.substr(eq + 1)));
  }
  return out;
}

ConfigMap load_config(const std::filesystem::path& file) { return parse_config(io::read_text(file)); }

double BandwidthRule::operator()(std::size_t n) const {
  if (fixed) return *fixed;
  return c_h * std::pow(static_cast<double>(n), exponent);
}

std::vector<double> XGridSpec::resolve(const SamplePath& path) const {
  if (x_min && x_max) return linspace(*x_min, *x_max, points);
  auto grid = default_x_grid(path, points);
  if (x_min || x_max) grid = linspace(x_min.value_or(grid.front()), x_max.value_or(grid.back()), points);
  return grid;
}

void ExperimentPlan::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::PlanInvalid, why); };
  if (n_list.empty()) fail("n_list must not be empty");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) fail("n_list must be strictly increasing");
  }
  if (n_list.front() < 2) fail("n_list entries must be >= 2");
  if (seeds < 1) fail("seeds must be >= 1");
  if (!bandwidth.fixed && !(bandwidth.exponent < 0.0)) fail("bandwidth exponent must be negative");
  if (bandwidth.fixed && !(*bandwidth.fixed > 0.0)) fail("fixed bandwidth must be positive");
  if (!(bandwidth.c_h > 0.0)) fail("bandwidth c_h must be positive");
  if (!(hurst > 0.5 && hurst < 1.0)) fail("hurst must exceed 0.5 for estimation");
  if (!(gamma > 1.0)) fail("gamma must exceed 1");
  if (!(c_alpha > 0.0)) fail("c_alpha must be positive");
  if (refine < 1) fail("refine must be >= 1");
  if (!(burn_in >= 0.0)) fail("burn_in must be nonnegative");
  if (!std::isfinite(sigma)) fail("sigma must be finite");
  if (x_grid.points < 1) fail("x_points must be >= 1");
  try {
    builtin_drift(drift_name, drift_params);
    builtin_kernel(kernel_name);
  } catch (const Error& e) {
    fail(e.what());
  }
}

nlohmann::json ExperimentPlan::to_json() const {
  nlohmann::json j;
  j["drift"] = {{"name", drift_name}, {"params", drift_params}};
  j["sigma"] = sigma;
  j["hurst"] = hurst;
  j["gamma"] = gamma;
  j["c_alpha"] = c_alpha;
  j["x0"] = x0;
  j["refine"] = refine;
  j["burn_in"] = burn_in;
  j["kernel"] = kernel_name;
  j["bandwidth"] = {{"c_h", bandwidth.c_h}, {"exponent", bandwidth.exponent}};
  if (bandwidth.fixed) j["bandwidth"]["fixed"] = *bandwidth.fixed;
  j["n_list"] = n_list;
  j["seeds"] = seeds;
  j["seed"] = seed;
  j["x_grid"] = {{"points", x_grid.points}};
  if (x_grid.x_min) j["x_grid"]["x_min"] = *x_grid.x_min;
  if (x_grid.x_max) j["x_grid"]["x_max"] = *x_grid.x_max;
  j["mode"] = to_string(mode);
  j["central_x"] = central_x;
  return j;
}

ExperimentPlan plan_from_config(const ConfigMap& c) {
  static const std::set<std::string> known = {
      "drift.name", "drift.theta", "drift.a",  "drift.c",    "sigma",         "hurst",     "gamma",
      "c_alpha",    "x0",          "refine",   "burn_in",    "kernel.name",   "bandwidth.c_h",
      "bandwidth.exponent",        "bandwidth.fixed",        "n_list",        "seeds",     "seed",
      "x_min",      "x_max",       "x_points", "mode",       "central_x",     "out",       "workers"};
  for (const auto& [key, value] : c) {
    if (!known.count(key)) throw Error(ErrorCode::PlanInvalid, "unknown config key '" + key + "'");
  }

  ExperimentPlan plan;
  if (auto it = c.find("drift.name"); it != c.end()) plan.drift_name = it->second;
  plan.drift_params.clear();
  for (const char* p : {"theta", "a", "c"}) {
    const std::string key = std::string("drift.") + p;
    if (c.count(key)) plan.drift_params[p] = to_double(c, key, 0.0);
  }
  if (plan.drift_name == "linear" && !plan.drift_params.count("theta")) plan.drift_params["theta"] = 1.0;

  plan.sigma = to_double(c, "sigma", plan.sigma);
  plan.hurst = to_double(c, "hurst", plan.hurst);
  plan.gamma = to_double(c, "gamma", plan.gamma);
  plan.c_alpha = to_double(c, "c_alpha", plan.c_alpha);
  plan.x0 = to_double(c, "x0", plan.x0);
  plan.refine = static_cast<std::size_t>(to_uint(c, "refine", plan.refine));
  plan.burn_in = to_double(c, "burn_in", plan.burn_in);
  if (auto it = c.find("kernel.name"); it != c.end()) plan.kernel_name = it->second;
  plan.bandwidth.c_h = to_double(c, "bandwidth.c_h", plan.bandwidth.c_h);
  plan.bandwidth.exponent = to_double(c, "bandwidth.exponent", plan.bandwidth.exponent);
  if (c.count("bandwidth.fixed")) plan.bandwidth.fixed = to_double(c, "bandwidth.fixed", 0.0);
  if (auto it = c.find("n_list"); it != c.end()) plan.n_list = parse_size_list(it->second);
  plan.seeds = static_cast<std::size_t>(to_uint(c, "seeds", plan.seeds));
  plan.seed = to_uint(c, "seed", plan.seed);
  if (c.count("x_min")) plan.x_grid.x_min = to_double(c, "x_min", 0.0);
  if (c.count("x_max")) plan.x_grid.x_max = to_double(c, "x_max", 0.0);
  plan.x_grid.points = static_cast<std::size_t>(to_uint(c, "x_points", plan.x_grid.points));
  if (auto it = c.find("mode"); it != c.end()) {
    try {
      plan.mode = parse_estimator_mode(it->second);
    } catch (const Error& e) {
      throw Error(ErrorCode::PlanInvalid, e.what());
    }
  }
  plan.central_x = to_double(c, "central_x", plan.central_x);
  if (auto it = c.find("out"); it != c.end()) plan.out_dir = it->second;
  plan.workers = static_cast<std::size_t>(to_uint(c, "workers", plan.workers));
  return plan;
}

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FBMDRIFT_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(count);
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

namespace {

struct PlanContext {
  DriftModel model;
  Kernel kernel;
  HurstIndex hurst;
  std::vector<ObservationGrid> grids;
  std::vector<PathSimulator> simulators;
  AssumptionReport assumptions;
};

PlanContext prepare(const ExperimentPlan& plan) {
  plan.validate();
  PlanContext ctx{builtin_drift(plan.drift_name, plan.drift_params), builtin_kernel(plan.kernel_name),
                  HurstIndex(plan.hurst), {}, {}, {}};
  SimulationOptions options;
  options.refine = plan.refine;
  options.burn_in = plan.burn_in;
  for (std::size_t n : plan.n_list) {
    ctx.grids.push_back(make_grid(n, plan.gamma, plan.c_alpha));
    ctx.simulators.emplace_back(ctx.model, plan.sigma, plan.x0, ctx.hurst, ctx.grids.back(), options);
  }
  ctx.assumptions = validate_assumptions(ctx.model, plan.gamma, ctx.hurst, &ctx.kernel);
  return ctx;
}

nlohmann::json assumption_json(const AssumptionReport& report) {
  nlohmann::json j = flags_json(report.flags());
  j["gamma_threshold"] = report.gamma_threshold;
  j["details"] = {{"i", report.lipschitz.detail},        {"ii", report.growth.detail},
                  {"iii", report.dissipative.detail},    {"iv", report.observation_rate.detail},
                  {"v", report.kernel.detail},           {"vi", report.bounded.detail}};
  return j;
}

struct SeedResult {
  double sup_error = 0.0;
  double l2_error = 0.0;
  double sup_error_smoothed = 0.0;
  std::optional<CurveSnapshot> snapshot;
};

}  // namespace

ConvergenceReport run_consistency(const ExperimentPlan& plan) {
  const PlanContext ctx = prepare(plan);
  const std::size_t levels = plan.n_list.size();
  std::vector<SeedResult> results(levels * plan.seeds);

  parallel_for(results.size(), resolve_workers(plan.workers), [&](std::size_t job) {
    const std::size_t level = job / plan.seeds;
    const std::size_t rep = job % plan.seeds;
    const SamplePath path = ctx.simulators[level].run(plan.seed, rep);

    EstimatorConfig cfg;
    cfg.kernel = ctx.kernel;
    cfg.h = plan.bandwidth(plan.n_list[level]);
    cfg.mode = plan.mode;
    cfg.x_grid = plan.x_grid.resolve(path);

    EstimateCurve curve;
    if (plan.mode == EstimatorMode::WickOracle) {
      const WickCorrector corrector(path, ctx.model);
      curve = nw_estimate(path, cfg, corrector);
    } else {
      curve = nw_estimate(path, cfg);
    }

    SeedResult r;
    std::vector<double> truth(curve.x.size());
    double sq = 0.0;
    std::size_t defined = 0;
    for (std::size_t i = 0; i < curve.x.size(); ++i) {
      truth[i] = ctx.model.b(curve.x[i]);
      if (!curve.defined[i]) continue;
      const double err = std::abs(curve.b_hat[i] - truth[i]);
      const double smoothed = smoothing_oracle(ctx.model, ctx.kernel, cfg.h, curve.x[i]);
      r.sup_error = std::max(r.sup_error, err);
      r.sup_error_smoothed = std::max(r.sup_error_smoothed, std::abs(curve.b_hat[i] - smoothed));
      sq += err * err;
      ++defined;
    }
    r.l2_error = std::sqrt(sq / static_cast<double>(defined));
    if (rep == 0) r.snapshot = CurveSnapshot{plan.n_list[level], std::move(curve), std::move(truth)};
    results[job] = std::move(r);
  });

  ConvergenceReport report;
  for (std::size_t level = 0; level < levels; ++level) {
    ConsistencyRow row;
    row.n = plan.n_list[level];
    row.alpha_n = ctx.grids[level].alpha_n;
    row.t_n = ctx.grids[level].horizon();
    row.h = plan.bandwidth(row.n);
    row.assumptions = ctx.assumptions.flags();
    for (std::size_t rep = 0; rep < plan.seeds; ++rep) {
      auto& r = results[level * plan.seeds + rep];
      row.sup_errors.push_back(r.sup_error);
      row.l2_errors.push_back(r.l2_error);
      row.sup_errors_smoothed.push_back(r.sup_error_smoothed);
      if (r.snapshot) report.curves.push_back(std::move(*r.snapshot));
    }
    row.median_sup_error = stats::median(row.sup_errors);
    row.iqr_sup_error = stats::iqr(row.sup_errors);
    row.median_l2_error = stats::median(row.l2_errors);
    row.iqr_l2_error = stats::iqr(row.l2_errors);
    row.median_sup_error_smoothed = stats::median(row.sup_errors_smoothed);
    row.iqr_sup_error_smoothed = stats::iqr(row.sup_errors_smoothed);
    report.rows.push_back(std::move(row));
  }
  report.metadata = {{"experiment", "consistency"},
                     {"plan", plan.to_json()},
                     {"assumptions", assumption_json(ctx.assumptions)}};
  return report;
}

TermDecayTable run_term_decay(const ExperimentPlan& plan) {
  const PlanContext ctx = prepare(plan);
  const std::size_t levels = plan.n_list.size();
  const double h = plan.bandwidth.fixed.value_or(plan.bandwidth(plan.n_list.front()));

  struct Sample {
    double residual_ratio = 0.0, noise = 0.0, noise_plain = 0.0, mass = 0.0;
    bool used = false;
  };
  std::vector<Sample> samples(levels * plan.seeds);

  parallel_for(samples.size(), resolve_workers(plan.workers), [&](std::size_t job) {
    const std::size_t level = job / plan.seeds;
    const std::size_t rep = job % plan.seeds;
    const SamplePath path = ctx.simulators[level].run(plan.seed, rep);
    const WickCorrector corrector(path, ctx.model);

    EstimatorConfig cfg;
    cfg.kernel = ctx.kernel;
    cfg.h = h;
    cfg.mode = EstimatorMode::WickOracle;
    const auto wick = decompose(path, ctx.model, cfg, plan.central_x, &corrector);
    cfg.mode = EstimatorMode::Plain;
    const auto plain = decompose(path, ctx.model, cfg, plan.central_x, nullptr);

    Sample s;
    s.mass = wick.mass;
    s.noise = wick.noise;
    s.noise_plain = plain.noise;
    if (wick.mass > 0.0) {
      s.residual_ratio = wick.drift_residual / wick.mass;
      s.used = true;
    }
    samples[job] = s;
  });

  TermDecayTable table;
  for (std::size_t level = 0; level < levels; ++level) {
    TermDecayRow row;
    row.n = plan.n_list[level];
    row.alpha_n = ctx.grids[level].alpha_n;
    row.t_n = ctx.grids[level].horizon();
    row.h = h;
    row.assumptions = ctx.assumptions.flags();
    std::vector<double> abs_ratio, noise_plain, masses, noise_sq;
    for (std::size_t rep = 0; rep < plan.seeds; ++rep) {
      const auto& s = samples[level * plan.seeds + rep];
      row.noise.push_back(s.noise);
      noise_sq.push_back(s.noise * s.noise);
      noise_plain.push_back(s.noise_plain);
      masses.push_back(s.mass);
      if (s.used) {
        row.residual_ratio.push_back(s.residual_ratio);
        abs_ratio.push_back(std::abs(s.residual_ratio));
      }
    }
    row.used_seeds = abs_ratio.size();
    if (row.used_seeds == 0) throw Error(ErrorCode::PlanInvalid, "central_x is outside every simulated path");
    row.mean_abs_residual = stats::mean(abs_ratio);
    row.median_abs_residual = stats::median(abs_ratio);
    row.mean_noise = stats::mean(row.noise);
    row.stderr_noise = row.noise.size() > 1 ? stats::standard_error(row.noise) : 0.0;
    row.second_moment_noise = stats::mean(noise_sq);
    row.mean_noise_plain = stats::mean(noise_plain);
    row.mean_mass = stats::mean(masses);
    table.rows.push_back(std::move(row));
  }

  if (levels >= 2) {
    std::vector<double> alphas, horizons, med, mean, moment;
    for (const auto& r : table.rows) {
      alphas.push_back(r.alpha_n);
      horizons.push_back(r.t_n);
      med.push_back(r.median_abs_residual);
      mean.push_back(r.mean_abs_residual);
      moment.push_back(r.second_moment_noise);
    }
    table.slope_residual_vs_alpha = stats::ols_slope(log_of(alphas), log_of(med));
    table.slope_residual_mean_vs_alpha = stats::ols_slope(log_of(alphas), log_of(mean));
    table.slope_noise_moment_vs_horizon = stats::ols_slope(log_of(horizons), log_of(moment));
  }
  table.metadata = {{"experiment", "term-decay"},
                    {"plan", plan.to_json()},
                    {"fixed_bandwidth", h},
                    {"assumptions", assumption_json(ctx.assumptions)}};
  return table;
}

std::string consistency_csv(const ConvergenceReport& report) {
  using io::format_number;
  std::string out =
      "n,t_n,alpha_n,h,median_sup_error,iqr_sup_error,median_l2_error,iqr_l2_error,"
      "median_sup_error_smoothed,iqr_sup_error_smoothed,seeds";
  if (!report.rows.empty()) {
    for (const auto& [name, ok] : report.rows.front().assumptions) out += "," + name;
  }
  out += "\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.n) + "," + format_number(r.t_n) + "," + format_number(r.alpha_n) + "," +
           format_number(r.h) + "," + format_number(r.median_sup_error) + "," + format_number(r.iqr_sup_error) +
           "," + format_number(r.median_l2_error) + "," + format_number(r.iqr_l2_error) + "," +
           format_number(r.median_sup_error_smoothed) + "," + format_number(r.iqr_sup_error_smoothed) + "," +
           std::to_string(r.sup_errors.size());
    for (const auto& [name, ok] : r.assumptions) out += ok ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

nlohmann::json consistency_json(const ConvergenceReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"n", r.n},
                    {"t_n", r.t_n},
                    {"alpha_n", r.alpha_n},
                    {"h", r.h},
                    {"median_sup_error", r.median_sup_error},
                    {"iqr_sup_error", r.iqr_sup_error},
                    {"median_l2_error", r.median_l2_error},
                    {"iqr_l2_error", r.iqr_l2_error},
                    {"median_sup_error_smoothed", r.median_sup_error_smoothed},
                    {"iqr_sup_error_smoothed", r.iqr_sup_error_smoothed},
                    {"sup_errors", r.sup_errors},
                    {"l2_errors", r.l2_errors},
                    {"sup_errors_smoothed", r.sup_errors_smoothed},
                    {"assumptions", flags_json(r.assumptions)}});
  }
  return {{"metadata", report.metadata}, {"rows", rows}};
}

std::string term_decay_csv(const TermDecayTable& table) {
  using io::format_number;
  std::string out =
      "n,t_n,alpha_n,h,mean_abs_I_over_S,median_abs_I_over_S,mean_III,stderr_III,mean_III_sq,mean_III_plain,"
      "mean_S,used_seeds";
  if (!table.rows.empty()) {
    for (const auto& [name, ok] : table.rows.front().assumptions) out += "," + name;
  }
  out += "\n";
  for (const auto& r : table.rows) {
    out += std::to_string(r.n) + "," + format_number(r.t_n) + "," + format_number(r.alpha_n) + "," +
           format_number(r.h) + "," + format_number(r.mean_abs_residual) + "," +
           format_number(r.median_abs_residual) + "," + format_number(r.mean_noise) + "," +
           format_number(r.stderr_noise) + "," + format_number(r.second_moment_noise) + "," +
           format_number(r.mean_noise_plain) + "," + format_number(r.mean_mass) + "," +
           std::to_string(r.used_seeds);
    for (const auto& [name, ok] : r.assumptions) out += ok ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

nlohmann::json term_decay_json(const TermDecayTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"n", r.n},
                    {"t_n", r.t_n},
                    {"alpha_n", r.alpha_n},
                    {"h", r.h},
                    {"mean_abs_I_over_S", r.mean_abs_residual},
                    {"median_abs_I_over_S", r.median_abs_residual},
                    {"mean_III", r.mean_noise},
                    {"stderr_III", r.stderr_noise},
                    {"mean_III_sq", r.second_moment_noise},
                    {"mean_III_plain", r.mean_noise_plain},
                    {"mean_S", r.mean_mass},
                    {"used_seeds", r.used_seeds},
                    {"I_over_S", r.residual_ratio},
                    {"III", r.noise},
                    {"assumptions", flags_json(r.assumptions)}});
  }
  return {{"metadata", table.metadata},
          {"rows", rows},
          {"slopes",
           {{"median_abs_I_over_S_vs_alpha_n", table.slope_residual_vs_alpha},
            {"mean_abs_I_over_S_vs_alpha_n", table.slope_residual_mean_vs_alpha},
            {"mean_III_sq_vs_t_n", table.slope_noise_moment_vs_horizon}}}};
}

std::vector<std::filesystem::path> emit_report(const ConvergenceReport& report, ReportFormat format,
                                               const std::filesystem::path& dir) {
  if (report.rows.empty()) throw Error(ErrorCode::EmptyReport, "convergence report has no rows");
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& name, const std::string& content) {
    io::write_text(dir / name, content);
    written.push_back(dir / name);
  };

  switch (format) {
    case ReportFormat::Csv:
      write("report.csv", consistency_csv(report));
      for (const auto& snap : report.curves) write("curves_n" + pad_n(snap.n) + ".csv", io::curve_csv(snap.curve));
      break;
    case ReportFormat::Json:
      write("report.json", consistency_json(report).dump(2) + "\n");
      break;
    case ReportFormat::Svg: {
      std::vector<io::SvgSeries> errors(2);
      errors[0].name = "median sup error";
      errors[1].name = "median L2 error";
      for (const auto& r : report.rows) {
        for (auto& s : errors) s.x.push_back(static_cast<double>(r.n));
        errors[0].y.push_back(r.median_sup_error);
        errors[1].y.push_back(r.median_l2_error);
      }
      write("plot_errors.svg", io::svg_line_plot({"Estimation error vs n", "n", "error", true, true}, errors));

      std::vector<io::SvgSeries> curves;
      if (!report.curves.empty()) {
        const auto& last = report.curves.back();
        curves.push_back({"true drift", last.curve.x, last.truth});
      }
      for (const auto& snap : report.curves) {
        io::SvgSeries s{"estimate n=" + std::to_string(snap.n), {}, {}};
        for (std::size_t i = 0; i < snap.curve.x.size(); ++i) {
          if (!snap.curve.defined[i]) continue;
          s.x.push_back(snap.curve.x[i]);
          s.y.push_back(snap.curve.b_hat[i]);
        }
        curves.push_back(std::move(s));
      }
      write("plot_curves.svg", io::svg_line_plot({"Estimated drift (first seed)", "x", "b(x)", false, false}, curves));
      break;
    }
  }
  return written;
}

std::vector<std::filesystem::path> emit_report(const TermDecayTable& table, ReportFormat format,
                                               const std::filesystem::path& dir) {
  if (table.rows.empty()) throw Error(ErrorCode::EmptyReport, "term-decay table has no rows");
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& name, const std::string& content) {
    io::write_text(dir / name, content);
    written.push_back(dir / name);
  };
  switch (format) {
    case ReportFormat::Csv:
      write("report.csv", term_decay_csv(table));
      break;
    case ReportFormat::Json:
      write("report.json", term_decay_json(table).dump(2) + "\n");
      break;
    case ReportFormat::Svg: {
      std::vector<io::SvgSeries> series(2);
      series[0].name = "median |I/S|";
      series[1].name = "E[III^2]";
      for (const auto& r : table.rows) {
        for (auto& s : series) s.x.push_back(static_cast<double>(r.n));
        series[0].y.push_back(r.median_abs_residual);
        series[1].y.push_back(r.second_moment_noise);
      }
      write("plot_terms.svg", io::svg_line_plot({"Term decay vs n", "n", "magnitude", true, true}, series));
      break;
    }
  }
  return written;
}

std::vector<SelfTestRow> fbm_selftest(HurstIndex hurst, const SelfTestOptions& options) {
  std::vector<SelfTestRow> rows;
  const std::size_t n = options.n;
  const auto paths = static_cast<Eigen::Index>(options.paths);
  const auto dim = static_cast<Eigen::Index>(n);

  auto empirical = [&](FbmMethod method, std::uint64_t substream_offset) {
    const FbmSampler sampler(n, options.dt, hurst, method);
    Eigen::MatrixXd values(paths, dim);
    for (Eigen::Index p = 0; p < paths; ++p) {
      RandomStream rng(options.seed, substream_offset + static_cast<std::uint64_t>(p));
      const auto inc = sampler.sample_increments(rng);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < dim; ++i) {
        acc += inc[static_cast<std::size_t>(i)];
        values(p, i) = acc;
      }
    }
    const Eigen::RowVectorXd mean = values.colwise().mean();
    const Eigen::MatrixXd centered = values.rowwise() - mean;
    return Eigen::MatrixXd((centered.transpose() * centered) / static_cast<double>(paths - 1));
  };

  Eigen::MatrixXd exact(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      exact(i, j) = fbm_covariance(static_cast<double>(i + 1) * options.dt, static_cast<double>(j + 1) * options.dt, hurst);
    }
  }
  // Standard error of a sample covariance entry of a Gaussian vector.
  Eigen::MatrixXd se(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      se(i, j) = std::sqrt((exact(i, i) * exact(j, j) + exact(i, j) * exact(i, j)) / static_cast<double>(paths));
    }
  }

  const Eigen::MatrixXd circ = empirical(FbmMethod::Circulant, 0);
  const double circ_err = (circ - exact).cwiseAbs().maxCoeff();
  rows.push_back({"circulant_cov_max_abs_error", circ_err, 0.02, circ_err <= 0.02});
  const double circ_z = ((circ - exact).cwiseAbs().array() / se.array()).maxCoeff();
  rows.push_back({"circulant_cov_max_z", circ_z, 5.0, circ_z <= 5.0});

  if (n <= FbmSampler::kMaxCholeskySteps) {
    const Eigen::MatrixXd chol = empirical(FbmMethod::Cholesky, options.paths);
    const double diff = (circ - chol).cwiseAbs().maxCoeff();
    rows.push_back({"circulant_vs_cholesky_max_abs_diff", diff, 0.02, diff <= 0.02});
    const double diff_z = ((circ - chol).cwiseAbs().array() / (std::sqrt(2.0) * se.array())).maxCoeff();
    rows.push_back({"circulant_vs_cholesky_max_z", diff_z, 5.0, diff_z <= 5.0});
  }

  // Marginal normality and lag-1 correlation of the first two increments across paths.
  {
    const FbmSampler sampler(std::max<std::size_t>(n, 2), options.dt, hurst);
    std::vector<double> first(options.paths), second(options.paths);
    for (std::size_t p = 0; p < options.paths; ++p) {
      RandomStream rng(options.seed, 2 * options.paths + p);
      const auto inc = sampler.sample_increments(rng);
      first[p] = inc[0];
      second[p] = inc[1];
    }
    const auto ad = stats::anderson_darling(first);
    rows.push_back({"first_increment_ad_pvalue", ad.p_value, 0.01, ad.p_value >= 0.01});

    const double m1 = stats::mean(first), m2 = stats::mean(second);
    double c12 = 0.0, c11 = 0.0, c22 = 0.0;
    for (std::size_t p = 0; p < options.paths; ++p) {
      c12 += (first[p] - m1) * (second[p] - m2);
      c11 += (first[p] - m1) * (first[p] - m1);
      c22 += (second[p] - m2) * (second[p] - m2);
    }
    const double rho_hat = c12 / std::sqrt(c11 * c22);
    const double rho = std::pow(2.0, 2.0 * hurst.value() - 1.0) - 1.0;
    const double tol = 4.0 / std::sqrt(static_cast<double>(options.paths));
    rows.push_back({"lag1_corr_abs_error", std::abs(rho_hat - rho), tol, std::abs(rho_hat - rho) <= tol});
  }

  if (hurst.value() == 0.5) {
    const FbmSampler sampler(options.normality_n, options.dt, hurst);
    std::size_t rejections = 0;
    double worst_lag1 = 0.0;
    std::vector<double> pooled;
    pooled.reserve(options.normality_paths * options.normality_n);
    for (std::size_t p = 0; p < options.normality_paths; ++p) {
      RandomStream rng(options.seed, 3 * options.paths + p);
      const auto inc = sampler.sample_increments(rng);
      if (stats::anderson_darling(inc).p_value < 0.01) ++rejections;
      worst_lag1 = std::max(worst_lag1, std::abs(stats::lag1_autocorrelation(inc)));
      pooled.insert(pooled.end(), inc.begin(), inc.end());
    }
    // 4 rejections out of 100 at the 1% level has binomial tail probability < 0.4%.
    const double allowed = std::floor(0.04 * static_cast<double>(options.normality_paths));
    rows.push_back({"path_increments_ad_rejections_1pct", static_cast<double>(rejections), allowed,
                    static_cast<double>(rejections) <= allowed});
    const auto pooled_ad = stats::anderson_darling(pooled);
    rows.push_back({"pooled_increments_ad_pvalue", pooled_ad.p_value, 0.01, pooled_ad.p_value >= 0.01});
    const double lag_tol = 4.0 / std::sqrt(static_cast<double>(options.normality_n));
    rows.push_back({"path_lag1_autocorr_max_abs", worst_lag1, lag_tol, worst_lag1 <= lag_tol});
  }
  return rows;
}

}  // namespace fbmdrift
