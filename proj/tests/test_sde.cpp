#include <doctest.h>

#include <cmath>
#include <vector>

#include "checks.hpp"
#include "fbmdrift/error.hpp"
#include "fbmdrift/sde.hpp"
#include "fbmdrift/stats.hpp"

using namespace fbmdrift;

TEST_CASE("observation grid arithmetic") {
  const auto g = make_grid(100, 2.0, 1.0);
  CHECK(g.alpha_n == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(g.horizon() == doctest::Approx(10.0).epsilon(1e-14));
  const auto g2 = make_grid(10000, 2.0);
  CHECK(g2.alpha_n == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(g2.horizon() == doctest::Approx(100.0).epsilon(1e-14));
  const auto a = make_grid(1000, 2.5), b = make_grid(4000, 2.5);
  CHECK(b.horizon() / a.horizon() == doctest::Approx(std::pow(4.0, 1.0 / 2.5)).epsilon(1e-12));
  CHECK(make_grid(100, 2.0, 3.0).alpha_n == doctest::Approx(0.3));
  CHECK(g.time(7) == doctest::Approx(0.7));
}

TEST_CASE("horizon grows along the n sweep") {
  double last = 0.0;
  for (std::size_t n : {256u, 1024u, 4096u, 16384u}) {
    const double t = make_grid(n, 2.5).horizon();
    CHECK(t > last);
    last = t;
  }
}

TEST_CASE("gamma must exceed one") {
  try {
    make_grid(10, 1.0);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidGamma);
  }
}

TEST_CASE("noise-free linear model follows exp(-t)") {
  const auto model = builtin_drift("linear", {{"theta", 1.0}});
  const auto grid = make_grid(100, 2.0);
  const auto path = simulate(model, 0.0, 1.0, HurstIndex(0.7), grid, 64, 1, 0.0);
  double worst = 0.0;
  for (std::size_t k = 0; k <= grid.n; ++k) worst = std::max(worst, std::abs(path.obs[k] - std::exp(-grid.time(k))));
  CHECK(worst <= 0.01);
}

TEST_CASE("zero drift reproduces x0 + sigma B exactly") {
  const auto model = builtin_drift("constant", {{"c", 0.0}});
  const auto grid = make_grid(50, 2.5);
  const auto path = simulate(model, 0.7, 2.0, HurstIndex(0.7), grid, 8, 3, 1.0);
  REQUIRE(path.has_fine());
  for (std::size_t j = 0; j < path.fine_values.size(); ++j) {
    CHECK(path.fine_values[j] == doctest::Approx(2.0 + 0.7 * path.fine_fbm->values[j]).epsilon(1e-13));
  }
}

TEST_CASE("observations are fine values at matching indices") {
  const auto model = builtin_drift("cubic");
  const auto grid = make_grid(200, 2.5);
  const auto path = simulate(model, 0.5, 0.3, HurstIndex(0.7), grid, 16, 5, 20.0);
  CHECK(path.obs.size() == grid.n + 1);
  CHECK(path.fine_values.size() == path.fine_times.size());
  for (std::size_t k = 0; k <= grid.n; ++k) CHECK(path.obs[k] == path.fine_values[path.fine_index(k)]);
  CHECK(path.fine_times[path.fine_index(0)] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(path.fine_times.front() < 0.0);
}

TEST_CASE("exact representation identity on every coarse interval") {
  for (const char* name : {"linear", "cubic", "linear_plus_sine"}) {
    const auto model = builtin_drift(name);
    const auto grid = make_grid(300, 2.5);
    const auto path = simulate(model, 0.5, 0.0, HurstIndex(0.7), grid, 16, 7, 5.0);
    const double dt = path.fine_dt();
    for (std::size_t k = 0; k < grid.n; ++k) {
      double drift = 0.0;
      for (std::size_t j = path.fine_index(k); j < path.fine_index(k + 1); ++j) drift += model.b(path.fine_values[j]) * dt;
      const double rhs = drift + path.noise_increment(k);
      const double lhs = path.obs[k + 1] - path.obs[k];
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max({std::abs(lhs), std::abs(drift), 1e-3}));
    }
  }
}

TEST_CASE("simulation is deterministic given seed and substream") {
  const auto model = builtin_drift("linear");
  const auto grid = make_grid(128, 2.5);
  const PathSimulator sim(model, 0.5, 0.0, HurstIndex(0.7), grid);
  CHECK(sim.run(4, 2).obs == sim.run(4, 2).obs);
  CHECK(sim.run(4, 2).obs != sim.run(4, 3).obs);
  CHECK(sim.run(4, 2).obs == simulate(model, 0.5, 0.0, HurstIndex(0.7), grid, 16, 4, 20.0, 2).obs);
}

TEST_CASE("explosive configuration reports a non-finite state") {
  const auto model = builtin_drift("cubic");
  const auto grid = make_grid(10, 2.0);
  try {
    simulate(model, 0.1, 100.0, HurstIndex(0.7), grid, 1, 1, 0.0);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteState);
  }
}

TEST_CASE("coarse-only paths have no fine grid") {
  SimulationOptions options;
  options.keep_fine = false;
  const PathSimulator sim(builtin_drift("linear"), 0.5, 0.0, HurstIndex(0.7), make_grid(64, 2.5), options);
  const auto path = sim.run(1);
  CHECK_FALSE(path.has_fine());
  CHECK_THROWS_AS(path.require_fine(), Error);
}

TEST_CASE("stationary fOU has zero mean") {
  const auto model = builtin_drift("linear", {{"theta", 1.0}});
  const auto grid = make_grid(4096, 2.5, 4.0);
  SimulationOptions options;
  options.burn_in = 50.0;
  options.keep_fine = false;
  const PathSimulator sim(model, 0.5, 1.0, HurstIndex(0.7), grid, options);
  std::vector<double> means;
  for (std::uint64_t s = 0; s < 30; ++s) means.push_back(stats::mean(sim.run(12, s).obs));
  CHECK(std::abs(stats::mean(means)) <= 4.0 * stats::standard_error(means));
}

TEST_CASE("increment bound holds on every coarse interval") {
  const auto model = builtin_drift("linear", {{"theta", 1.0}});
  const HurstIndex h(0.7);
  const PathSimulator sim(model, 0.5, 0.0, h, make_grid(1024, 2.5));
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto result = checks::lemma2_increment_bound(sim.run(31, s), model, h.value() - 0.05);
    CHECK(result.violations == 0);
    CHECK(result.intervals == 1024);
  }
}

TEST_CASE("doubling refine roughly halves the strong error") {
  const auto model = builtin_drift("linear", {{"theta", 1.0}});
  const HurstIndex h(0.7);
  const auto grid = make_grid(16, 2.0, 0.5);
  SimulationOptions reference_options;
  reference_options.refine = 1024;
  reference_options.burn_in = 0.0;
  const PathSimulator reference(model, 0.5, 1.0, h, grid, reference_options);

  auto run_coarse = [&](const FbmPath& fine, std::size_t refine) {
    SimulationOptions options = reference_options;
    options.refine = refine;
    const PathSimulator sim(model, 0.5, 1.0, h, grid, options);
    const std::size_t every = 1024 / refine;
    FbmPath coarse = fine;
    coarse.values.clear();
    coarse.times.clear();
    for (std::size_t i = 0; i < fine.values.size(); i += every) {
      coarse.values.push_back(fine.values[i]);
      coarse.times.push_back(fine.times[i]);
    }
    coarse.dt = fine.dt * static_cast<double>(every);
    return sim.run_with(coarse);
  };
  auto error = [](const SamplePath& a, const SamplePath& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.obs.size(); ++k) worst = std::max(worst, std::abs(a.obs[k] - b.obs[k]));
    return worst;
  };

  const FbmSampler sampler(reference.fine_steps(), grid.alpha_n / 1024.0, h);
  double e8 = 0.0, e16 = 0.0, e32 = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const FbmPath fine = sampler.sample(90, s);
    const auto truth = reference.run_with(fine);
    e8 += error(run_coarse(fine, 8), truth);
    e16 += error(run_coarse(fine, 16), truth);
    e32 += error(run_coarse(fine, 32), truth);
  }
  CHECK(e8 / e16 >= 1.5);
  CHECK(e8 / e16 <= 3.0);
  CHECK(e16 / e32 >= 1.5);
  CHECK(e16 / e32 <= 3.0);
}
