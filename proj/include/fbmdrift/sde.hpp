#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbmdrift/fbm.hpp"
#include "fbmdrift/models.hpp"

namespace fbmdrift {

//! Observation times t_k = k * alpha_n, k = 0..n, with alpha_n = c_alpha * n^{-1 + 1/gamma}.
struct ObservationGrid {
  std::size_t n = 0;
  double gamma = 0.0;
  double c_alpha = 1.0;
  double alpha_n = 0.0;

  double time(std::size_t k) const noexcept { return static_cast<double>(k) * alpha_n; }
  double horizon() const noexcept { return static_cast<double>(n) * alpha_n; }
};

ObservationGrid make_grid(std::size_t n, double gamma, double c_alpha = 1.0);

//! Simulated trajectory: coarse observations plus (optionally) the fine Euler
//! grid and the driving fBm it was built from.
//!
//! The fine grid covers the burn-in window and the observation window. Fine
//! index burn_steps corresponds to observation time 0, and coarse index k to
//! fine index burn_steps + k * refine.
struct SamplePath {
  ObservationGrid grid;
  std::vector<double> obs;
  std::vector<double> fine_times;
  std::vector<double> fine_values;
  std::optional<FbmPath> fine_fbm;
  std::string model_tag;
  double sigma = 0.0;
  double x0 = 0.0;
  double burn_in = 0.0;
  HurstIndex hurst{0.5};
  std::size_t refine = 1;
  std::size_t burn_steps = 0;
  std::uint64_t seed = 0;
  std::uint64_t substream = 0;

  bool has_fine() const noexcept { return !fine_values.empty() && fine_fbm.has_value(); }
  double fine_dt() const noexcept { return grid.alpha_n / static_cast<double>(refine); }
  std::size_t fine_index(std::size_t k) const noexcept { return burn_steps + k * refine; }
  //! sigma * (B^H_{t_{k+1}} - B^H_{t_k}).
  double noise_increment(std::size_t k) const;
  //! Throws MissingFineGrid unless the fine grid is stored.
  void require_fine() const;
};

struct SimulationOptions {
  std::size_t refine = 16;
  double burn_in = 20.0;
  bool keep_fine = true;
  FbmMethod method = FbmMethod::Circulant;
};

//! Euler scheme for dX = b(X) dt + sigma dB^H on the fine grid alpha_n / refine.
//!
//! The fBm sampler for the whole (burn-in + horizon) window is built once,
//! so repeated runs over seeds only pay for the FFT per path.
class PathSimulator {
public:
  PathSimulator(DriftModel model, double sigma, double x0, HurstIndex hurst, ObservationGrid grid,
                SimulationOptions options = {});

  SamplePath run(std::uint64_t seed, std::uint64_t substream = 0) const;
  //! Euler recursion driven by a given fBm path (must match fine_steps()).
  SamplePath run_with(const FbmPath& fbm) const;

  std::size_t fine_steps() const noexcept { return burn_steps_ + grid_.n * options_.refine; }
  std::size_t burn_steps() const noexcept { return burn_steps_; }
  const DriftModel& model() const noexcept { return model_; }

private:
  DriftModel model_;
  double sigma_;
  double x0_;
  HurstIndex hurst_;
  ObservationGrid grid_;
  SimulationOptions options_;
  std::size_t burn_steps_;
  FbmSampler sampler_;
};

SamplePath simulate(const DriftModel& model, double sigma, double x0, HurstIndex hurst,
                    const ObservationGrid& grid, std::size_t refine, std::uint64_t seed,
                    double burn_in, std::uint64_t substream = 0);

//! Hoelder coefficient of the coarse observations (exponent checked against H).
double holder_coefficient(const SamplePath& path, double alpha);

}  // namespace fbmdrift
