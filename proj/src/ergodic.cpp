#include "fbmdrift/ergodic.hpp"

#include <cmath>

#include "fbmdrift/error.hpp"

namespace fbmdrift {

TestFunction builtin_test_function(const std::string& name) {
  if (name == "one") return {"one", [](double) { return 1.0; }, [](double) { return 0.0; }, 1.0, 0};
  if (name == "identity") return {"identity", [](double x) { return x; }, [](double) { return 1.0; }, 1.0, 1};
  if (name == "square") {
    return {"square", [](double x) { return x * x; }, [](double x) { return 2.0 * x; }, 2.0, 2};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown test function '" + name + "'");
}

double time_average(const SamplePath& path, const TestFunction& phi) {
  path.require_fine();
  const std::size_t begin = path.fine_index(0);
  const std::size_t end = path.fine_index(path.grid.n);
  double sum = 0.5 * (phi.phi(path.fine_values[begin]) + phi.phi(path.fine_values[end]));
  for (std::size_t j = begin + 1; j < end; ++j) sum += phi.phi(path.fine_values[j]);
  return sum / static_cast<double>(end - begin);
}

double step_average(const SamplePath& path, const TestFunction& phi) {
  if (path.grid.n < 1) throw Error(ErrorCode::InvalidArgument, "step average needs n >= 1");
  double sum = 0.0;
  for (std::size_t k = 0; k < path.grid.n; ++k) sum += phi.phi(path.obs[k]);
  return sum / static_cast<double>(path.grid.n);
}

double fou_stationary_variance(double theta, double sigma, HurstIndex hurst) {
  const double h = hurst.value();
  return sigma * sigma * h * std::tgamma(2.0 * h) * std::pow(theta, -2.0 * h);
}

bool ergodic_theorem_covers(double gamma, int m, int p, HurstIndex hurst) {
  const double md = m;
  return gamma > 1.0 + (md * md + p) * hurst.value() && gamma > p + 1.0;
}

double ergodic_reference(const ErgodicSetup& setup, const TestFunction& phi, std::uint64_t seed) {
  if (setup.model.name == "linear" && (phi.name == "one" || phi.name == "identity" || phi.name == "square")) {
    if (phi.name == "one") return 1.0;
    if (phi.name == "identity") return 0.0;
    return fou_stationary_variance(setup.model.params.at("theta"), setup.sigma, setup.hurst);
  }
  constexpr std::size_t kScale = 10;
  constexpr std::size_t kPaths = 10;
  ObservationGrid longer = setup.grid;
  longer.n = setup.grid.n * kScale;
  SimulationOptions options = setup.options;
  options.keep_fine = true;
  const PathSimulator simulator(setup.model, setup.sigma, setup.x0, setup.hurst, longer, options);
  double total = 0.0;
  for (std::size_t i = 0; i < kPaths; ++i) total += time_average(simulator.run(seed, 1000 + i), phi);
  return total / static_cast<double>(kPaths);
}

ErgodicCheck ergodic_check(const ErgodicSetup& setup, const TestFunction& phi, std::uint64_t seed) {
  SimulationOptions options = setup.options;
  options.keep_fine = true;
  const PathSimulator simulator(setup.model, setup.sigma, setup.x0, setup.hurst, setup.grid, options);
  const SamplePath path = simulator.run(seed, 0);
  ErgodicCheck out;
  out.phi = phi.name;
  out.estimate_step = step_average(path, phi);
  out.estimate_time = time_average(path, phi);
  out.reference = ergodic_reference(setup, phi, seed);
  out.covered_by_theorem =
      ergodic_theorem_covers(setup.grid.gamma, setup.model.poly_degree_m, phi.degree_p, setup.hurst);
  return out;
}

}  // namespace fbmdrift
