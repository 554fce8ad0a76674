#include "fbmdrift/sde.hpp"

#include <cmath>
#include <string>

#include "fbmdrift/error.hpp"

namespace fbmdrift {

ObservationGrid make_grid(std::size_t n, double gamma, double c_alpha) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "observation grid needs n >= 1");
  if (!(gamma > 1.0)) throw Error(ErrorCode::InvalidGamma, "gamma must exceed 1");
  if (!(c_alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "c_alpha must be positive");
  ObservationGrid grid;
  grid.n = n;
  grid.gamma = gamma;
  grid.c_alpha = c_alpha;
  grid.alpha_n = c_alpha * std::pow(static_cast<double>(n), -1.0 + 1.0 / gamma);
  return grid;
}

double SamplePath::noise_increment(std::size_t k) const {
  require_fine();
  return sigma * fine_fbm->increment(fine_index(k), fine_index(k + 1));
}

void SamplePath::require_fine() const {
  if (!has_fine()) throw Error(ErrorCode::MissingFineGrid, "operation needs the stored fine grid");
}

namespace {

std::size_t burn_in_steps(double burn_in, double fine_dt) {
  if (!(burn_in >= 0.0)) throw Error(ErrorCode::InvalidArgument, "burn_in must be nonnegative");
  return static_cast<std::size_t>(std::ceil(burn_in / fine_dt - 1e-9));
}

}  // namespace

PathSimulator::PathSimulator(DriftModel model, double sigma, double x0, HurstIndex hurst, ObservationGrid grid,
                             SimulationOptions options)
    : model_(std::move(model)),
      sigma_(sigma),
      x0_(x0),
      hurst_(hurst),
      grid_(grid),
      options_(options),
      burn_steps_(0),
      sampler_([&] {
        if (options.refine < 1) throw Error(ErrorCode::InvalidArgument, "refine must be >= 1");
        if (!std::isfinite(sigma)) throw Error(ErrorCode::InvalidArgument, "sigma must be finite");
        if (!model_.b) throw Error(ErrorCode::InvalidArgument, "drift model has no b");
        const double dt = grid.alpha_n / static_cast<double>(options.refine);
        burn_steps_ = burn_in_steps(options.burn_in, dt);
        return FbmSampler(burn_steps_ + grid.n * options.refine, dt, hurst, options.method);
      }()) {}

SamplePath PathSimulator::run(std::uint64_t seed, std::uint64_t substream) const {
  return run_with(sampler_.sample(seed, substream));
}

SamplePath PathSimulator::run_with(const FbmPath& fbm) const {
  const std::size_t steps = fine_steps();
  if (fbm.steps() != steps) throw Error(ErrorCode::InvalidArgument, "driving fBm has the wrong length");

  const double dt = grid_.alpha_n / static_cast<double>(options_.refine);
  std::vector<double> x(steps + 1);
  x[0] = x0_;
  for (std::size_t j = 0; j < steps; ++j) {
    x[j + 1] = x[j] + model_.b(x[j]) * dt + sigma_ * (fbm.values[j + 1] - fbm.values[j]);
    if (!std::isfinite(x[j + 1])) {
      throw Error(ErrorCode::NonFiniteState, "Euler state became non-finite at fine step " + std::to_string(j + 1));
    }
  }

  SamplePath path;
  path.grid = grid_;
  path.model_tag = model_.name;
  path.sigma = sigma_;
  path.x0 = x0_;
  path.hurst = hurst_;
  path.refine = options_.refine;
  path.burn_steps = burn_steps_;
  path.burn_in = static_cast<double>(burn_steps_) * dt;
  path.seed = fbm.seed;
  path.substream = fbm.substream;

  path.obs.resize(grid_.n + 1);
  for (std::size_t k = 0; k <= grid_.n; ++k) path.obs[k] = x[burn_steps_ + k * options_.refine];

  if (options_.keep_fine) {
    path.fine_times.resize(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) {
      path.fine_times[j] = (static_cast<double>(j) - static_cast<double>(burn_steps_)) * dt;
    }
    path.fine_values = std::move(x);
    path.fine_fbm = fbm;
  }
  return path;
}

SamplePath simulate(const DriftModel& model, double sigma, double x0, HurstIndex hurst,
                    const ObservationGrid& grid, std::size_t refine, std::uint64_t seed, double burn_in,
                    std::uint64_t substream) {
  SimulationOptions options;
  options.refine = refine;
  options.burn_in = burn_in;
  return PathSimulator(model, sigma, x0, hurst, grid, options).run(seed, substream);
}

double holder_coefficient(const SamplePath& path, double alpha) {
  if (!(alpha > 0.0) || alpha >= path.hurst.value()) {
    throw Error(ErrorCode::InvalidExponent, "hoelder exponent must satisfy 0 < alpha < H");
  }
  return holder_coefficient(path.obs, path.grid.alpha_n, alpha);
}

}  // namespace fbmdrift
