#include "fbmdrift/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fbmdrift/error.hpp"

namespace fbmdrift {

namespace {

double param_or(const ParamMap& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::vector<double> lattice(double lo, double hi, double step) {
  const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  std::vector<double> xs(count);
  for (std::size_t i = 0; i < count; ++i) xs[i] = lo + static_cast<double>(i) * step;
  return xs;
}

double biweight(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double v = 1.0 - u * u;
  return 15.0 / 16.0 * v * v;
}

double biweight_prime(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  return -15.0 / 4.0 * u * (1.0 - u * u);
}

double triweight(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double v = 1.0 - u * u;
  return 35.0 / 32.0 * v * v * v;
}

double triweight_prime(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double v = 1.0 - u * u;
  return -105.0 / 16.0 * u * v * v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

DriftModel builtin_drift(const std::string& name, const ParamMap& params) {
  DriftModel model;
  model.name = name;

  if (name == "linear") {
    const double theta = param_or(params, "theta", 1.0);
    if (!(theta > 0.0)) throw Error(ErrorCode::InvalidParams, "linear drift requires theta > 0");
    model.params = {{"theta", theta}};
    model.b = [theta](double x) { return -theta * x; };
    model.b_prime = [theta](double) { return -theta; };
    model.lipschitz_L = theta;
    model.dissipativity_M = theta;
    model.poly_degree_m = 1;
    model.growth_C = theta;
    model.sup_b_prime = theta;
    return model;
  }

  if (name == "cubic") {
    model.b = [](double x) { return -x - x * x * x; };
    model.b_prime = [](double x) { return -1.0 - 3.0 * x * x; };
    model.dissipativity_M = 1.0;
    model.poly_degree_m = 3;
    model.growth_C = 4.0;
    return model;
  }

  if (name == "linear_plus_sine") {
    const double theta = param_or(params, "theta", 2.0);
    const double a = param_or(params, "a", 0.5);
    if (!(a >= 0.0) || !(theta > a)) {
      throw Error(ErrorCode::InvalidParams, "linear_plus_sine requires theta > a >= 0");
    }
    model.params = {{"theta", theta}, {"a", a}};
    model.b = [theta, a](double x) { return -theta * x + a * std::sin(x); };
    model.b_prime = [theta, a](double x) { return -theta + a * std::cos(x); };
    model.lipschitz_L = theta + a;
    model.dissipativity_M = theta - a;
    model.poly_degree_m = 1;
    model.growth_C = theta + 2.0 * a;
    model.sup_b_prime = theta + a;
    return model;
  }

  if (name == "constant") {
    const double c = param_or(params, "c", 0.0);
    model.params = {{"c", c}};
    model.b = [c](double) { return c; };
    model.b_prime = [](double) { return 0.0; };
    model.poly_degree_m = 0;
    model.growth_C = std::abs(c);
    model.sup_b = std::abs(c);
    model.sup_b_prime = 0.0;
    return model;
  }

  throw Error(ErrorCode::UnknownModel, "unknown drift model '" + name + "'");
}

std::vector<std::string> builtin_drift_names() { return {"linear", "cubic", "linear_plus_sine", "constant"}; }

Kernel builtin_kernel(const std::string& name) {
  if (name == "biweight") {
    return Kernel{"biweight", &biweight, &biweight_prime, 15.0 / 16.0, 5.0 / (2.0 * std::sqrt(3.0))};
  }
  if (name == "triweight") {
    return Kernel{"triweight", &triweight, &triweight_prime, 35.0 / 32.0, 4.2 / std::sqrt(5.0)};
  }
  throw Error(ErrorCode::UnknownKernel, "unknown kernel '" + name + "'");
}

std::vector<std::string> builtin_kernel_names() { return {"biweight", "triweight"}; }

KernelCheck check_kernel(const Kernel& kernel) {
  KernelCheck check;
  const auto xs = lattice(-1.5, 1.5, 3.0 / 10000.0);

  check.nonnegative = std::all_of(xs.begin(), xs.end(), [&](double u) { return kernel.k(u) >= 0.0; });
  check.vanishes_outside_support = std::all_of(xs.begin(), xs.end(), [&](double u) {
    return std::abs(u) <= 1.0 || (kernel.k(u) == 0.0 && kernel.k_prime(u) == 0.0);
  });

  using boost::math::quadrature::gauss_kronrod;
  check.mass = gauss_kronrod<double, 61>::integrate(kernel.k, -1.0, 1.0, 15, 1e-13);
  check.unit_mass = std::abs(check.mass - 1.0) <= 1e-8;

  constexpr double step = 1e-5;
  for (double u : xs) {
    const double fd = (kernel.k(u + step) - kernel.k(u - step)) / (2.0 * step);
    check.max_derivative_error = std::max(check.max_derivative_error, std::abs(fd - kernel.k_prime(u)));
  }
  check.derivative_consistent = check.max_derivative_error <= 1e-6;
  return check;
}

bool lattice_lipschitz_holds(const DriftModel& model, double L, double lo, double hi, double step) {
  const auto xs = lattice(lo, hi, step);
  std::vector<double> bs(xs.size());
  std::transform(xs.begin(), xs.end(), bs.begin(), model.b);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const double dx = xs[j] - xs[i];
      if (std::abs(bs[j] - bs[i]) > L * dx * (1.0 + 1e-12)) return false;
    }
  }
  return true;
}

bool lattice_dissipative_holds(const DriftModel& model, double M, double lo, double hi, double step) {
  const auto xs = lattice(lo, hi, step);
  std::vector<double> bs(xs.size());
  std::transform(xs.begin(), xs.end(), bs.begin(), model.b);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const double dx = xs[j] - xs[i];
      if ((bs[j] - bs[i]) * dx > -M * dx * dx * (1.0 - 1e-12)) return false;
    }
  }
  return true;
}

bool lattice_growth_holds(const DriftModel& model, double lo, double hi, double step) {
  const auto xs = lattice(lo, hi, step);
  return std::all_of(xs.begin(), xs.end(), [&](double x) {
    const double bound = model.growth_C * (1.0 + std::pow(std::abs(x), model.poly_degree_m));
    return std::abs(model.b(x)) + std::abs(model.b_prime(x)) <= bound * (1.0 + 1e-12);
  });
}

std::vector<std::pair<std::string, bool>> AssumptionReport::flags() const {
  return {{"i_lipschitz", lipschitz.holds},       {"ii_growth", growth.holds},
          {"iii_dissipative", dissipative.holds}, {"iv_observation_rate", observation_rate.holds},
          {"v_kernel", kernel.holds},             {"vi_bounded", bounded.holds}};
}

bool AssumptionReport::all_hold() const {
  const auto f = flags();
  return std::all_of(f.begin(), f.end(), [](const auto& p) { return p.second; });
}

AssumptionReport validate_assumptions(const DriftModel& model, double gamma, HurstIndex hurst,
                                      const Kernel* kernel) {
  AssumptionReport report;

  if (model.lipschitz_L) {
    report.lipschitz.holds = lattice_lipschitz_holds(model, *model.lipschitz_L);
    report.lipschitz.detail = "L = " + fmt(*model.lipschitz_L);
  } else {
    report.lipschitz.detail = "no global Lipschitz constant";
  }

  report.growth.holds = static_cast<bool>(model.b_prime) && lattice_growth_holds(model);
  report.growth.detail = "C = " + fmt(model.growth_C) + ", m = " + std::to_string(model.poly_degree_m);

  if (model.dissipativity_M) {
    report.dissipative.holds = lattice_dissipative_holds(model, *model.dissipativity_M);
    report.dissipative.detail = "M = " + fmt(*model.dissipativity_M);
  } else {
    report.dissipative.detail = "drift is not dissipative";
  }

  const double m = model.poly_degree_m;
  report.gamma_threshold = std::max(1.0 + m * m * hurst.value(), 2.0);
  report.observation_rate.holds = gamma > report.gamma_threshold;
  report.observation_rate.detail = "gamma = " + fmt(gamma) + ", need > " + fmt(report.gamma_threshold);

  if (kernel != nullptr) {
    report.kernel.holds = check_kernel(*kernel).ok();
    report.kernel.detail = kernel->name;
  } else {
    report.kernel.holds = true;
    report.kernel.detail = "registered kernels are C1 with support [-1, 1]";
  }

  report.bounded.holds = model.sup_b.has_value() && model.sup_b_prime.has_value();
  report.bounded.detail = model.sup_b ? "sup|b| = " + fmt(*model.sup_b) : "sup|b| = inf";
  if (!model.sup_b_prime) report.bounded.detail += ", sup|b'| = inf";
  return report;
}

}  // namespace fbmdrift
