#include <doctest.h>

#include <cmath>
#include <vector>

#include "fbmdrift/ergodic.hpp"
#include "fbmdrift/stats.hpp"

using namespace fbmdrift;

namespace {

SamplePath fou(std::size_t n, double c_alpha, std::uint64_t seed, std::uint64_t substream = 0) {
  const auto model = builtin_drift("linear", {{"theta", 1.0}});
  SimulationOptions options;
  options.burn_in = 20.0;
  return PathSimulator(model, 0.5, 0.0, HurstIndex(0.7), make_grid(n, 2.5, c_alpha), options).run(seed, substream);
}

}  // namespace

TEST_CASE("constant test function averages to one") {
  const auto p = fou(256, 1.0, 1);
  const auto one = builtin_test_function("one");
  CHECK(time_average(p, one) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(step_average(p, one) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("constant path averages to its value") {
  const auto zero = builtin_drift("constant", {{"c", 0.0}});
  const auto p = simulate(zero, 0.0, 1.75, HurstIndex(0.7), make_grid(64, 2.5), 4, 1, 1.0);
  const auto id = builtin_test_function("identity");
  CHECK(time_average(p, id) == doctest::Approx(1.75).epsilon(1e-14));
  CHECK(step_average(p, id) == doctest::Approx(1.75).epsilon(1e-14));
}

TEST_CASE("step average uses left endpoints only") {
  SamplePath p;
  p.grid.n = 1;
  p.grid.alpha_n = 1.0;
  p.obs = {0.0, 2.0};
  CHECK(step_average(p, builtin_test_function("identity")) == 0.0);
}

TEST_CASE("step average is the mean of the first n observations") {
  const auto p = fou(1000, 1.0, 2);
  const auto sq = builtin_test_function("square");
  double sum = 0.0;
  for (std::size_t k = 0; k < p.grid.n; ++k) sum += p.obs[k] * p.obs[k];
  CHECK(std::abs(step_average(p, sq) - sum / 1000.0) <= 1e-14);
}

TEST_CASE("time average needs the fine grid") {
  SamplePath p;
  p.grid.n = 1;
  p.obs = {0.0, 1.0};
  CHECK_THROWS(time_average(p, builtin_test_function("one")));
}

TEST_CASE("test function growth bounds hold on [-10, 10]") {
  for (const char* name : {"one", "identity", "square"}) {
    const auto phi = builtin_test_function(name);
    for (int i = -1000; i <= 1000; ++i) {
      const double x = i / 100.0;
      CHECK(std::abs(phi.phi(x)) + std::abs(phi.phi_prime(x)) <= phi.growth_C * (1.0 + std::pow(std::abs(x), phi.degree_p)) + 1e-12);
    }
  }
}

TEST_CASE("stationary variance of fractional OU") {
  CHECK(fou_stationary_variance(1.0, 0.5, HurstIndex(0.7)) == doctest::Approx(0.25 * 0.7 * std::tgamma(1.4)));
  CHECK(fou_stationary_variance(1.0, 0.5, HurstIndex(0.7)) == doctest::Approx(0.15528).epsilon(1e-4));
  CHECK(fou_stationary_variance(1.0, 1.0, HurstIndex(0.5)) == doctest::Approx(0.5));
}

TEST_CASE("rate condition of the ergodic theorem") {
  CHECK_FALSE(ergodic_theorem_covers(2.5, 1, 2, HurstIndex(0.7)));
  CHECK(ergodic_theorem_covers(3.5, 1, 2, HurstIndex(0.7)));
  CHECK_FALSE(ergodic_theorem_covers(2.9, 1, 2, HurstIndex(0.1)));
  CHECK(ergodic_theorem_covers(2.5, 1, 0, HurstIndex(0.7)));
}

TEST_CASE("long-run fOU averages of x^2 match the stationary variance") {
  const double target = fou_stationary_variance(1.0, 0.5, HurstIndex(0.7));
  // n = 2^16 with t_n = 1e4.
  const double c_alpha = 1e4 / 65536.0 * std::pow(65536.0, 0.6);
  const auto p = fou(65536, c_alpha, 3);
  CHECK(p.grid.horizon() == doctest::Approx(1e4));
  const auto sq = builtin_test_function("square");
  CHECK(std::abs(time_average(p, sq) / target - 1.0) <= 0.05);
  CHECK(std::abs(step_average(p, sq) / target - 1.0) <= 0.05);
}

TEST_CASE("step and time averages converge to each other") {
  const auto sq = builtin_test_function("square");
  auto mean_gap = [&](std::size_t n) {
    std::vector<double> gaps;
    for (std::uint64_t s = 0; s < 8; ++s) {
      const auto p = fou(n, 1.0, 4, s);
      gaps.push_back(std::abs(step_average(p, sq) - time_average(p, sq)));
    }
    return stats::mean(gaps);
  };
  const double small = mean_gap(1024), large = mean_gap(16384);
  CHECK(large < small);
  CHECK(large <= 0.02);
}

TEST_CASE("ergodic check labels and references") {
  ErgodicSetup setup{builtin_drift("linear", {{"theta", 1.0}}), 0.5, 0.0, HurstIndex(0.7), make_grid(1024, 2.5), {}};
  const auto r = ergodic_check(setup, builtin_test_function("square"), 5);
  CHECK(r.phi == "square");
  CHECK(r.reference == doctest::Approx(fou_stationary_variance(1.0, 0.5, HurstIndex(0.7))));
  CHECK_FALSE(r.covered_by_theorem);
  setup.grid = make_grid(1024, 3.5);
  CHECK(ergodic_check(setup, builtin_test_function("square"), 5).covered_by_theorem);

  ErgodicSetup cubic{builtin_drift("cubic"), 0.5, 0.0, HurstIndex(0.7), make_grid(256, 2.5), {}};
  const double ref = ergodic_reference(cubic, builtin_test_function("square"), 6);
  CHECK(ref > 0.0);
  CHECK(ref < fou_stationary_variance(1.0, 0.5, HurstIndex(0.7)));
}
