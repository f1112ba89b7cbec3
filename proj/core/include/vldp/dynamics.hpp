#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vldp/kernel.hpp"
#include "vldp/model.hpp"

namespace vldp {

// An H^1_0 control represented by its derivative, piecewise constant on the
// grid cells; f(0) = 0 and f(t_i) = dt * sum_{j<i} fdot[j].
struct ControlPath {
  Grid grid;
  std::vector<double> fdot;  // n values, one per cell

  ControlPath() = default;
  ControlPath(Grid g, std::vector<double> d);
  static ControlPath zero(const Grid& g) { return ControlPath(g, std::vector<double>(g.n_steps, 0.0)); }
  static ControlPath constant(const Grid& g, double a) { return ControlPath(g, std::vector<double>(g.n_steps, a)); }

  double energy() const;                  // dt * sum fdot^2
  std::vector<double> values() const;     // f at the n+1 grid points
};

// Driver path v at grid points plus its kernel transform.
struct DriverPath {
  Grid grid;
  std::vector<double> v;     // n+1 values, v[0] = v0
  std::vector<double> vhat;  // n+1 values, vhat[0] = 0
};

// Terminal log-prices of a simulated batch.
struct PathBatch {
  double epsilon = 0.0;
  std::size_t n_paths = 0;
  std::vector<double> terminal_logprice;           // one per path
  std::vector<std::vector<double>> full_paths;     // optional, n+1 per path
};

struct SimulateOptions {
  bool keep_full_paths = false;
  unsigned n_threads = 0;  // 0 = hardware concurrency
};

// Explicit Euler for the control ODE  v' = b(v) + sigma_bar(v) fdot,
// v(0) = v0. When the dispersion family requires a nonnegative state the
// step is truncated at 0, which keeps every stored value >= 0 and freezes
// a driftless square-root driver once it is absorbed. Also returns
// vhat = (K applied to U of the left-endpoint values).
DriverPath solve_control_ode(const ModelSpec& spec, const KernelWeights& weights,
                             const ControlPath& ctrl);

// The transform of the controlled driver: the vhat component alone.
std::vector<double> check_operator(const ModelSpec& spec, const KernelWeights& weights,
                                   const ControlPath& ctrl);

// Recovers the control from a driver path:
//   fdot_i = ((v_{i+1} - v_i)/dt - b(v_i)) / sigma_bar(v_i).
// Throws singular_control_error where the dispersion vanishes.
ControlPath inverse_control(const ModelSpec& spec, const Grid& grid,
                            std::span<const double> driver_values);

// Full-truncation Euler for the scaled driver plus left-endpoint Euler for
// the log-price. Deterministic given (seed, n_paths, grid) for any thread
// count: path p draws from its own substream.
PathBatch simulate_batch(const ModelSpec& spec, const KernelWeights& weights,
                         double epsilon, std::size_t n_paths, std::uint64_t seed,
                         const SimulateOptions& opts = {});

unsigned resolve_thread_count(unsigned requested);

}  // namespace vldp
