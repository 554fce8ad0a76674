#include "fbmdrift/cli.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "fbmdrift/ergodic.hpp"
#include "fbmdrift/error.hpp"
#include "fbmdrift/estimator.hpp"
#include "fbmdrift/harness.hpp"
#include "fbmdrift/io.hpp"
#include "fbmdrift/malliavin.hpp"

namespace fbmdrift {

namespace {

// Keys understood by the CLI but not part of ExperimentPlan.
const std::set<std::string> kCliOnlyKeys = {"n", "x", "phi", "input", "emit_fine", "baseline"};

class FlagSet {
public:
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help,
                   const std::string& shown_default = "") {
    storage_.emplace_back();
    CLI::Option* opt = app->add_option(flag, storage_.back(), help);
    if (!shown_default.empty()) opt->default_str(shown_default);
    bindings_.push_back({opt, key, &storage_.back()});
    return opt;
  }

  CLI::Option* add_switch(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    switches_.emplace_back(false);
    CLI::Option* opt = app->add_flag(flag, switches_.back(), help);
    switch_bindings_.push_back({opt, key});
    return opt;
  }

  void overlay(ConfigMap& config) const {
    for (const auto& b : bindings_) {
      if (b.opt->count() > 0) config[b.key] = *b.value;
    }
    for (const auto& [opt, key] : switch_bindings_) {
      if (opt->count() > 0) config[key] = "1";
    }
  }

private:
  struct Binding {
    CLI::Option* opt;
    std::string key;
    std::string* value;
  };
  std::deque<std::string> storage_;
  std::deque<bool> switches_;
  std::vector<Binding> bindings_;
  std::vector<std::pair<CLI::Option*, std::string>> switch_bindings_;
};

struct Command {
  CLI::App* app = nullptr;
  FlagSet flags;
  std::string config_file;
};

void add_model_flags(Command& c) {
  auto* app = c.app;
  app->add_option("--config", c.config_file, "Plan file with key = value lines; flags override it");
  c.flags.add(app, "--model", "drift.name", "Drift model: linear, cubic, linear_plus_sine, constant", "linear");
  c.flags.add(app, "--theta", "drift.theta", "Mean-reversion rate theta", "1 (linear), 2 (linear_plus_sine)");
  c.flags.add(app, "--a", "drift.a", "Sine amplitude a of linear_plus_sine", "0.5");
  c.flags.add(app, "--c", "drift.c", "Value of the constant drift", "0");
  c.flags.add(app, "--sigma", "sigma", "Noise scale sigma", "0.5");
  c.flags.add(app, "--hurst", "hurst", "Hurst index H", "0.7");
  c.flags.add(app, "--x0", "x0", "Initial state", "0");
  c.flags.add(app, "--gamma", "gamma", "Observation-rate exponent gamma > 1", "2.5");
  c.flags.add(app, "--c-alpha", "c_alpha", "Mesh constant c_alpha in alpha_n = c_alpha n^(-1+1/gamma)", "1");
  c.flags.add(app, "--refine", "refine", "Euler sub-steps per observation interval", "16");
  c.flags.add(app, "--burn-in", "burn_in", "Burn-in time before t_0", "20");
  c.flags.add(app, "--seed", "seed", "Random seed (required)");
  c.flags.add(app, "--out", "out", "Output directory");
}

void add_estimator_flags(Command& c, const std::string& mode_default) {
  auto* app = c.app;
  c.flags.add(app, "--kernel", "kernel.name", "Kernel: biweight, triweight", "biweight");
  c.flags.add(app, "--bandwidth", "bandwidth.fixed", "Fixed bandwidth h", "c_h * n^exponent");
  c.flags.add(app, "--c-h", "bandwidth.c_h", "Bandwidth rule constant c_h", "1");
  c.flags.add(app, "--bandwidth-exponent", "bandwidth.exponent", "Bandwidth rule exponent", "-0.2");
  c.flags.add(app, "--mode", "mode", "Estimator mode: plain, wick-oracle", mode_default);
}

void add_grid_flags(Command& c) {
  c.flags.add(c.app, "--x-min", "x_min", "Lower end of the evaluation grid", "5% quantile of observations");
  c.flags.add(c.app, "--x-max", "x_max", "Upper end of the evaluation grid", "95% quantile of observations");
  c.flags.add(c.app, "--x-points", "x_points", "Number of evaluation points", "41");
}

void add_sweep_flags(Command& c) {
  c.flags.add(c.app, "--n-list", "n_list", "Strictly increasing sample sizes", "1024,4096,16384");
  c.flags.add(c.app, "--seeds", "seeds", "Replications per n", "50");
  c.flags.add(c.app, "--workers", "workers", "Worker threads (env FBMDRIFT_WORKERS)", "machine parallelism");
}

ConfigMap resolve(const Command& c, const ConfigMap& defaults) {
  ConfigMap config = defaults;
  if (!c.config_file.empty()) {
    for (auto& [key, value] : load_config(c.config_file)) config[key] = value;
  }
  c.flags.overlay(config);
  return config;
}

std::pair<ExperimentPlan, ConfigMap> split(const ConfigMap& config) {
  ConfigMap plan_keys, extra;
  for (const auto& [key, value] : config) {
    (kCliOnlyKeys.count(key) ? extra : plan_keys)[key] = value;
  }
  return {plan_from_config(plan_keys), extra};
}

void require(const ConfigMap& config, const std::string& key, const std::string& flag) {
  if (!config.count(key)) throw Error(ErrorCode::UsageError, flag + " is required");
}

std::size_t size_value(const ConfigMap& extra, const std::string& key) {
  const std::string& text = extra.at(key);
  try {
    std::size_t used = 0;
    if (!text.empty() && text.front() == '-') throw std::invalid_argument(key);
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(key);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::UsageError, key + " must be a nonnegative integer, got '" + text + "'");
  }
}

double real_value(const ConfigMap& extra, const std::string& key) {
  const std::string& text = extra.at(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::UsageError, key + " must be a number, got '" + text + "'");
  }
}

void require_estimation_hurst(const ExperimentPlan& plan) {
  if (!(plan.hurst > 0.5 && plan.hurst < 1.0)) {
    throw Error(ErrorCode::InvalidExponent, "hurst must exceed 0.5 for estimation");
  }
}

nlohmann::json resolved_json(const std::string& subcommand, const ConfigMap& config, const ExperimentPlan& plan) {
  return {{"subcommand", subcommand}, {"config", config}, {"plan", plan.to_json()}};
}

SimulationOptions simulation_options(const ExperimentPlan& plan) {
  SimulationOptions options;
  options.refine = plan.refine;
  options.burn_in = plan.burn_in;
  return options;
}

SamplePath simulate_single(const ExperimentPlan& plan, std::size_t n) {
  const DriftModel model = builtin_drift(plan.drift_name, plan.drift_params);
  const ObservationGrid grid = make_grid(n, plan.gamma, plan.c_alpha);
  const PathSimulator simulator(model, plan.sigma, plan.x0, HurstIndex(plan.hurst), grid, simulation_options(plan));
  return simulator.run(plan.seed, 0);
}

void check_single_plan(const ExperimentPlan& plan) {
  if (plan.refine < 1) throw Error(ErrorCode::PlanInvalid, "refine must be >= 1");
  if (!(plan.burn_in >= 0.0)) throw Error(ErrorCode::PlanInvalid, "burn_in must be nonnegative");
  if (!(plan.c_alpha > 0.0)) throw Error(ErrorCode::PlanInvalid, "c_alpha must be positive");
}

EstimatorConfig estimator_config(const ExperimentPlan& plan, std::size_t n) {
  EstimatorConfig cfg;
  cfg.kernel = builtin_kernel(plan.kernel_name);
  cfg.h = plan.bandwidth(n);
  cfg.mode = plan.mode;
  if (!(cfg.h > 0.0)) throw Error(ErrorCode::PlanInvalid, "bandwidth must be positive");
  return cfg;
}

int run_simulate(const Command& c, std::ostream& out) {
  const ConfigMap config = resolve(c, {});
  require(config, "seed", "--seed");
  require(config, "n", "--n");
  require(config, "out", "--out");
  const auto [plan, extra] = split(config);
  check_single_plan(plan);
  const std::size_t n = size_value(extra, "n");
  if (n < 1) throw Error(ErrorCode::UsageError, "--n must be >= 1");

  const SamplePath path = simulate_single(plan, n);
  io::write_text(plan.out_dir / "path.csv", io::sample_path_csv(path));
  nlohmann::json meta = io::sample_path_metadata(path);
  meta["resolved"] = resolved_json("simulate", config, plan);
  if (extra.count("emit_fine")) {
    io::write_text(plan.out_dir / "path_fine.csv", io::sample_path_fine_csv(path));
    meta["fine_file"] = "path_fine.csv";
  }
  io::write_text(plan.out_dir / "meta.json", meta.dump(2) + "\n");
  out << "wrote " << (plan.out_dir / "path.csv").string() << " (n=" << n << ", t_n=" << io::format_number(path.grid.horizon())
      << ")\n";
  return 0;
}

int run_estimate(const Command& c, std::ostream& out) {
  const ConfigMap config = resolve(c, {{"mode", "plain"}});
  require(config, "out", "--out");
  const auto [plan, extra] = split(config);
  require_estimation_hurst(plan);
  check_single_plan(plan);

  SamplePath path;
  std::optional<DriftModel> model;
  if (extra.count("input")) {
    if (plan.mode == EstimatorMode::WickOracle) {
      throw Error(ErrorCode::UsageError, "wick-oracle mode needs a simulated path, not --input");
    }
    path = io::read_sample_path_csv(extra.at("input"), HurstIndex(plan.hurst));
  } else {
    require(config, "seed", "--seed");
    require(config, "n", "--n");
    path = simulate_single(plan, size_value(extra, "n"));
    model = builtin_drift(plan.drift_name, plan.drift_params);
  }

  EstimatorConfig cfg = estimator_config(plan, path.grid.n);
  cfg.x_grid = plan.x_grid.resolve(path);
  const bool baseline = extra.count("baseline") > 0;
  const EstimateCurve curve = baseline ? nw_estimate_weighted_baseline(path, cfg)
                                       : nw_estimate(path, cfg, model ? &*model : nullptr);

  nlohmann::json doc = {{"resolved", resolved_json("estimate", config, plan)},
                        {"path", io::sample_path_metadata(path)},
                        {"h", cfg.h},
                        {"estimator", baseline ? "weighted-baseline" : to_string(cfg.mode)},
                        {"curve", io::curve_json(curve)}};
  io::write_text(plan.out_dir / "curve.csv", io::curve_csv(curve));
  io::write_text(plan.out_dir / "curve.json", doc.dump(2) + "\n");
  out << "estimated " << curve.defined_count() << "/" << curve.x.size() << " points, h=" << io::format_number(cfg.h)
      << ", wrote " << (plan.out_dir / "curve.csv").string() << "\n";
  return 0;
}

int run_decompose(const Command& c, std::ostream& out) {
  const ConfigMap config = resolve(c, {{"mode", "wick-oracle"}, {"x", "0"}});
  require(config, "seed", "--seed");
  require(config, "n", "--n");
  const auto [plan, extra] = split(config);
  require_estimation_hurst(plan);
  check_single_plan(plan);

  const DriftModel model = builtin_drift(plan.drift_name, plan.drift_params);
  const SamplePath path = simulate_single(plan, size_value(extra, "n"));
  const double x = real_value(extra, "x");
  const EstimatorConfig cfg = estimator_config(plan, path.grid.n);
  const EstimateTerms terms = decompose(path, model, cfg, x);

  nlohmann::json doc = {{"x", x},
                        {"h", cfg.h},
                        {"mode", to_string(cfg.mode)},
                        {"I", terms.drift_residual},
                        {"II", terms.smoothed_drift},
                        {"III", terms.noise},
                        {"S", terms.mass},
                        {"b_true", model.b(x)}};
  doc["estimate"] = terms.mass > 0.0 ? nlohmann::json(terms.estimate()) : nlohmann::json(nullptr);
  doc["resolved"] = resolved_json("decompose", config, plan);
  if (!plan.out_dir.empty()) io::write_text(plan.out_dir / "decompose.json", doc.dump(2) + "\n");
  out << doc.dump(2) << "\n";
  return 0;
}

int run_ergodic(const Command& c, std::ostream& out) {
  const ConfigMap config = resolve(c, {{"phi", "square"}});
  require(config, "seed", "--seed");
  require(config, "n", "--n");
  const auto [plan, extra] = split(config);
  check_single_plan(plan);

  ErgodicSetup setup{builtin_drift(plan.drift_name, plan.drift_params),
                     plan.sigma,
                     plan.x0,
                     HurstIndex(plan.hurst),
                     make_grid(size_value(extra, "n"), plan.gamma, plan.c_alpha),
                     simulation_options(plan)};
  const TestFunction phi = builtin_test_function(extra.at("phi"));
  const ErgodicCheck check = ergodic_check(setup, phi, plan.seed);

  nlohmann::json doc = {{"phi", check.phi},
                        {"estimate_step", check.estimate_step},
                        {"estimate_time", check.estimate_time},
                        {"reference", check.reference},
                        {"covered_by_theorem", check.covered_by_theorem},
                        {"label", check.covered_by_theorem ? "theorem-covered" : "outside hypothesis"},
                        {"t_n", setup.grid.horizon()},
                        {"resolved", resolved_json("ergodic-check", config, plan)}};
  if (!plan.out_dir.empty()) io::write_text(plan.out_dir / "ergodic.json", doc.dump(2) + "\n");
  out << doc.dump(2) << "\n";
  return 0;
}

const ConfigMap kSweepDefaults = {{"n_list", "1024,4096,16384"}, {"seeds", "50"}};

void print_paths(std::ostream& out, const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) out << "wrote " << f.string() << "\n";
}

int run_convergence(const Command& c, std::ostream& out) {
  const ConfigMap config = resolve(c, kSweepDefaults);
  require(config, "seed", "--seed");
  require(config, "out", "--out");
  auto [plan, extra] = split(config);
  require_estimation_hurst(plan);

  ConvergenceReport report = run_consistency(plan);
  report.metadata["resolved"] = resolved_json("convergence", config, plan);
  out << "n,t_n,h,median_sup_error,median_l2_error,median_sup_error_smoothed\n";
  for (const auto& r : report.rows) {
    out << r.n << "," << io::format_number(r.t_n) << "," << io::format_number(r.h) << ","
        << io::format_number(r.median_sup_error) << "," << io::format_number(r.median_l2_error) << ","
        << io::format_number(r.median_sup_error_smoothed) << "\n";
  }
  for (auto format : {ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg}) {
    print_paths(out, emit_report(report, format, plan.out_dir));
  }
  return 0;
}

int run_term_decay_cmd(const Command& c, std::ostream& out) {
  const ConfigMap config = resolve(c, kSweepDefaults);
  require(config, "seed", "--seed");
  require(config, "out", "--out");
  auto [plan, extra] = split(config);
  require_estimation_hurst(plan);

  TermDecayTable table = run_term_decay(plan);
  table.metadata["resolved"] = resolved_json("term-decay", config, plan);
  out << "slope median|I/S| vs alpha_n: " << io::format_number(table.slope_residual_vs_alpha) << "\n"
      << "slope E[III^2] vs t_n: " << io::format_number(table.slope_noise_moment_vs_horizon) << "\n";
  for (auto format : {ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg}) {
    print_paths(out, emit_report(table, format, plan.out_dir));
  }
  return 0;
}

struct SelfTestArgs {
  double hurst = 0.75;
  SelfTestOptions options;
  std::string out_dir;
};

int run_selftest(const SelfTestArgs& a, std::ostream& out) {
  if (a.options.n < 2) throw Error(ErrorCode::UsageError, "--n must be >= 2");
  if (a.options.paths < 2) throw Error(ErrorCode::UsageError, "--paths must be >= 2");
  if (!(a.options.dt > 0.0)) throw Error(ErrorCode::UsageError, "--dt must be positive");
  const auto rows = fbm_selftest(HurstIndex(a.hurst), a.options);
  bool all = true;
  nlohmann::json doc = nlohmann::json::array();
  out << "check,value,threshold,result\n";
  for (const auto& r : rows) {
    all = all && r.pass;
    out << r.name << "," << io::format_number(r.value) << "," << io::format_number(r.threshold) << ","
        << (r.pass ? "PASS" : "FAIL") << "\n";
    doc.push_back({{"name", r.name}, {"value", r.value}, {"threshold", r.threshold}, {"pass", r.pass}});
  }
  if (!a.out_dir.empty()) {
    nlohmann::json report = {{"hurst", a.hurst},
                             {"n", a.options.n},
                             {"dt", a.options.dt},
                             {"paths", a.options.paths},
                             {"seed", a.options.seed},
                             {"rows", doc},
                             {"pass", all}};
    io::write_text(std::filesystem::path(a.out_dir) / "selftest.json", report.dump(2) + "\n");
  }
  return all ? 0 : 3;
}

void write_error(std::ostream& err, std::string_view code, const std::string& message) {
  err << nlohmann::json{{"error", std::string(code)}, {"message", message}}.dump() << "\n";
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Drift estimation for SDEs driven by fractional Brownian motion", "fbmdrift"};
  app.require_subcommand(1);

  std::deque<Command> commands;
  auto make = [&](const std::string& name, const std::string& description) -> Command& {
    commands.emplace_back();
    commands.back().app = app.add_subcommand(name, description);
    return commands.back();
  };

  Command& simulate_cmd = make("simulate", "Simulate one path and write path.csv and meta.json");
  add_model_flags(simulate_cmd);
  simulate_cmd.flags.add(simulate_cmd.app, "--n", "n", "Number of observation intervals (required)");
  simulate_cmd.flags.add_switch(simulate_cmd.app, "--emit-fine", "emit_fine", "Also write the fine Euler grid");

  Command& estimate_cmd = make("estimate", "Nadaraya-Watson drift estimate on an x grid");
  add_model_flags(estimate_cmd);
  estimate_cmd.flags.add(estimate_cmd.app, "--n", "n", "Number of observation intervals when simulating");
  estimate_cmd.flags.add(estimate_cmd.app, "--input", "input", "Read observations from a t,X CSV instead of simulating");
  estimate_cmd.flags.add_switch(estimate_cmd.app, "--baseline", "baseline",
                                "Use the (t_n - t_k)^(1-2H) weighted comparison estimator");
  add_estimator_flags(estimate_cmd, "plain");
  add_grid_flags(estimate_cmd);

  Command& decompose_cmd = make("decompose", "Terms I, II, III and S of the estimator at one x");
  add_model_flags(decompose_cmd);
  decompose_cmd.flags.add(decompose_cmd.app, "--n", "n", "Number of observation intervals (required)");
  decompose_cmd.flags.add(decompose_cmd.app, "--x", "x", "Evaluation point", "0");
  add_estimator_flags(decompose_cmd, "wick-oracle");

  Command& ergodic_cmd = make("ergodic-check", "Compare step and time averages with the stationary expectation");
  add_model_flags(ergodic_cmd);
  ergodic_cmd.flags.add(ergodic_cmd.app, "--n", "n", "Number of observation intervals (required)");
  ergodic_cmd.flags.add(ergodic_cmd.app, "--phi", "phi", "Test function: one, identity, square", "square");

  Command& convergence_cmd = make("convergence", "Consistency sweep over n and seeds");
  add_model_flags(convergence_cmd);
  add_estimator_flags(convergence_cmd, "wick-oracle");
  add_grid_flags(convergence_cmd);
  add_sweep_flags(convergence_cmd);

  Command& decay_cmd = make("term-decay", "Decay of terms I and III over an n sweep at fixed h");
  add_model_flags(decay_cmd);
  add_estimator_flags(decay_cmd, "wick-oracle");
  add_sweep_flags(decay_cmd);
  decay_cmd.flags.add(decay_cmd.app, "--central-x", "central_x", "Evaluation point", "0");

  SelfTestArgs selftest;
  CLI::App* selftest_app = app.add_subcommand("fbm-selftest", "Covariance and normality checks of the fBm sampler");
  selftest_app->add_option("--hurst", selftest.hurst, "Hurst index H")->capture_default_str();
  selftest_app->add_option("--n", selftest.options.n, "Grid steps")->capture_default_str();
  selftest_app->add_option("--dt", selftest.options.dt, "Grid spacing")->capture_default_str();
  selftest_app->add_option("--paths", selftest.options.paths, "Monte-Carlo paths")->capture_default_str();
  selftest_app->add_option("--seed", selftest.options.seed, "Random seed")->capture_default_str();
  selftest_app->add_option("--out", selftest.out_dir, "Directory for selftest.json");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    write_error(err, to_string(ErrorCode::UsageError), e.what());
    return 2;
  }

  try {
    if (*simulate_cmd.app) return run_simulate(simulate_cmd, out);
    if (*estimate_cmd.app) return run_estimate(estimate_cmd, out);
    if (*decompose_cmd.app) return run_decompose(decompose_cmd, out);
    if (*ergodic_cmd.app) return run_ergodic(ergodic_cmd, out);
    if (*convergence_cmd.app) return run_convergence(convergence_cmd, out);
    if (*decay_cmd.app) return run_term_decay_cmd(decay_cmd, out);
    if (*selftest_app) return run_selftest(selftest, out);
  } catch (const Error& e) {
    write_error(err, to_string(e.code()), e.what());
    return e.code() == ErrorCode::IoError ? 1 : 2;
  } catch (const std::exception& e) {
    write_error(err, "InternalError", e.what());
    return 1;
  }
  write_error(err, to_string(ErrorCode::UsageError), "no subcommand given");
  return 2;
}

}  // namespace fbmdrift
