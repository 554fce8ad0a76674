#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fbmdrift/fbm.hpp"

namespace fbmdrift {

using RealFunction = std::function<double(double)>;
using ParamMap = std::map<std::string, double>;

//! Drift b of dX = b(X) dt + sigma dB^H together with its regularity constants.
//!
//! Absent constants mean the property does not hold globally (e.g. the cubic
//! drift has no global Lipschitz constant, the linear drift is unbounded).
struct DriftModel {
  std::string name;
  ParamMap params;
  RealFunction b;
  RealFunction b_prime;
  std::optional<double> lipschitz_L;
  std::optional<double> dissipativity_M;
  int poly_degree_m = 0;
  double growth_C = 0.0;  // |b| + |b'| <= C (1 + |x|^m)
  std::optional<double> sup_b;
  std::optional<double> sup_b_prime;
};

//! Kernel supported on [-1, 1] and continuously differentiable on the real line.
struct Kernel {
  std::string name;
  double (*k)(double) = nullptr;
  double (*k_prime)(double) = nullptr;
  double sup_k = 0.0;
  double sup_k_prime = 0.0;
};

/// Registered names: linear {theta}, cubic {}, linear_plus_sine {theta, a},
/// and the test model constant {c}.
DriftModel builtin_drift(const std::string& name, const ParamMap& params = {});
std::vector<std::string> builtin_drift_names();

/// Registered names: biweight (default), triweight.
Kernel builtin_kernel(const std::string& name);
std::vector<std::string> builtin_kernel_names();

//! K_h(u) = K(u / h) / h.
inline double scaled_kernel(const Kernel& kernel, double h, double u) { return kernel.k(u / h) / h; }
//! K_h'(u) = K'(u / h) / h^2.
inline double scaled_kernel_derivative(const Kernel& kernel, double h, double u) {
  return kernel.k_prime(u / h) / (h * h);
}

struct KernelCheck {
  bool nonnegative = false;
  bool vanishes_outside_support = false;
  bool unit_mass = false;
  bool derivative_consistent = false;
  double mass = 0.0;
  double max_derivative_error = 0.0;

  bool ok() const { return nonnegative && vanishes_outside_support && unit_mass && derivative_consistent; }
};

//! Lattice certification of the kernel conditions (nonnegative, compact
//! support, unit mass, k' matching central differences of k).
KernelCheck check_kernel(const Kernel& kernel);

struct AssumptionStatus {
  bool holds = false;
  std::string detail;
};

//! Which of the six model assumptions hold for an experiment configuration.
//! Lattice-based certification on [-5, 5] with step 0.01; warnings only.
struct AssumptionReport {
  AssumptionStatus lipschitz;        // i
  AssumptionStatus growth;           // ii
  AssumptionStatus dissipative;      // iii
  AssumptionStatus observation_rate; // iv
  AssumptionStatus kernel;           // v
  AssumptionStatus bounded;          // vi
  double gamma_threshold = 0.0;      // max{1 + m^2 H, 2}

  std::vector<std::pair<std::string, bool>> flags() const;
  bool all_hold() const;
};

AssumptionReport validate_assumptions(const DriftModel& model, double gamma, HurstIndex hurst,
                                      const Kernel* kernel = nullptr);

//! Lattice checks of the declared constants of a drift (used by the
//! assumption report and the registry self-checks).
bool lattice_lipschitz_holds(const DriftModel& model, double L, double lo = -5.0, double hi = 5.0,
                             double step = 0.01);
bool lattice_dissipative_holds(const DriftModel& model, double M, double lo = -5.0, double hi = 5.0,
                               double step = 0.01);
bool lattice_growth_holds(const DriftModel& model, double lo = -5.0, double hi = 5.0, double step = 0.01);

}  // namespace fbmdrift
