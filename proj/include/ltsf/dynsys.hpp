#pragma once

#include <map>
#include <string>
#include <vector>

#include "ltsf/numkit.hpp"

namespace ltsf {

/// Request for a batch of synthetic trajectories. n_train + n_test
/// trajectories are produced in stream order; trajectory i always draws from
/// the substream mix64(seed, i), so results do not depend on worker count.
struct GeneratorSpec {
  std::string system;  // sinewave | mackey_glass | lorenz | lotka_volterra |
                       // ks | cahn_hilliard
  std::uint64_t seed = 0;
  int n_train = 18000;
  int n_test = 2000;
  int traj_len = 0;  // 0 -> per-system default
  bool noise_enabled = true;  // lotka_volterra only
  int workers = 1;
  std::map<std::string, double> overrides;  // named constants, see dynsys.cpp
};

struct TrajectorySet {
  std::string system;
  std::uint64_t seed = 0;
  double dt = 1.0;  // spacing of recorded frames
  int count = 0;
  int len = 0;
  int dim = 0;
  long regenerated = 0;  // lotka_volterra resamples after underflow
  std::vector<double> values;  // row-major (trajectory, time, dim)

  Eigen::Map<const RowMajorMatrix> trajectory(int i) const {
    return {values.data() + std::size_t(i) * len * dim, len, dim};
  }
  Eigen::Map<RowMajorMatrix> trajectory(int i) {
    return {values.data() + std::size_t(i) * len * dim, len, dim};
  }
};

/// One explicit Euler step x + dt f(x).
template <class F>
Vector euler_step(F&& f, const Vector& x, double dt) {
  return x + dt * f(x);
}

/// One classical Runge-Kutta step.
template <class F>
Vector rk4_step(F&& f, const Vector& x, double dt) {
  const Vector k1 = f(x);
  const Vector k2 = f(x + 0.5 * dt * k1);
  const Vector k3 = f(x + 0.5 * dt * k2);
  const Vector k4 = f(x + dt * k3);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

TrajectorySet gen_sinewave(const GeneratorSpec& spec);
TrajectorySet gen_mackey_glass(const GeneratorSpec& spec);
TrajectorySet gen_lorenz(const GeneratorSpec& spec);
TrajectorySet gen_lotka_volterra(const GeneratorSpec& spec);
TrajectorySet gen_ks(const GeneratorSpec& spec);
TrajectorySet gen_cahn_hilliard(const GeneratorSpec& spec);

/// Dispatch on spec.system.
TrajectorySet generate(const GeneratorSpec& spec);

/// Per-system state dimension and default trajectory length.
struct SystemInfo {
  int dim;
  int default_traj_len;
};
SystemInfo system_info(const std::string& system);

// Vector fields and single-system integrators, exposed for direct testing.

Vector lorenz_rhs(const Vector& x, double sigma, double rho, double beta);
Vector lotka_volterra_rhs(const Vector& x, double alpha, double beta,
                          double delta, double gamma);

/// One Mackey-Glass Euler step from state y with delayed value ytau.
double mackey_glass_step(double y, double ytau, double dt);

/// Kuramoto-Sivashinsky on a periodic grid of `grid` points over [0, L],
/// RK4 in spectral space with 2/3-rule dealiasing of the quadratic term.
/// Returns `frames` rows of the real field, saving every `save_every` steps;
/// frame 0 is u0 itself.
RowMajorMatrix ks_simulate(const Vector& u0, int frames, int save_every,
                           double dt, double domain);

/// Cahn-Hilliard on a periodic side x side grid over the unit square,
/// semi-implicit spectral stepping (linear part implicit, cubic explicit).
/// Returns `frames` rows of the flattened full-resolution field, saving every
/// step; frame 0 is c0 itself.
RowMajorMatrix ch_simulate(const RowMajorMatrix& c0, int frames, double dt,
                           double kappa);

}  // namespace ltsf
