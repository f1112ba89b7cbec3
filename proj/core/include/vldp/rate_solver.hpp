#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "vldp/functionals.hpp"

namespace vldp {

struct SolverOptions {
  double gtol = 1e-7;
  double ftol = 1e-10;
  std::size_t max_iterations = 2000;
  std::size_t extra_starts = 5;    // random-perturbation starts
  std::uint64_t seed = 1;
  unsigned n_threads = 0;          // workers for independent starts; 0 = auto
  bool use_fd_gradient = false;    // central differences instead of the adjoint
  std::optional<std::vector<double>> warm_start;  // extra start (continuation)
};

struct RateResult {
  double target = 0.0;                 // scalar x (0 for path problems)
  std::vector<double> target_path;     // path targets only
  double value = 0.0;
  ControlPath minimizer;
  std::size_t n_starts = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::vector<double> objective_history;  // best start, per accepted iterate
  bool driver_touched_zero = false;       // truncation was active at the optimum
};

// Shared per-(spec, grid) precomputation: the kernel weight matrix is built
// once and reused by every objective evaluation.
class RateProblem {
 public:
  RateProblem(ModelSpec spec, Grid grid);

  const ModelSpec& spec() const { return spec_; }
  const Grid& grid() const { return grid_; }
  const KernelWeights& weights() const { return weights_; }

  // Objective value; fills *grad (adjoint of the full ODE-kernel-sigma
  // chain) when grad is non-null.
  double scalar_objective(const std::vector<double>& fdot, double x,
                          std::vector<double>* grad) const;
  double path_objective(const std::vector<double>& fdot, std::span<const double> g,
                        std::vector<double>* grad) const;

  // Central finite differences, step 1e-6 (1 + max|fdot|). Verification
  // path for the adjoint.
  std::vector<double> scalar_gradient_fd(const std::vector<double>& fdot, double x) const;

  bool driver_touches_zero(const std::vector<double>& fdot) const;

 private:
  ModelSpec spec_;
  Grid grid_;
  KernelWeights weights_;
};

// I_T(x) = inf over controls of the scalar rate objective. Multi-start:
// zero control, the constant-spot-vol analytic control and scaled variants,
// a 1-d scan over constant controls, then seeded random perturbations.
RateResult minimize_scalar_rate(const ModelSpec& spec, const Grid& grid, double x,
                                const SolverOptions& opts = {});

// Q(g) for a piecewise-linear target with g[0] = 0.
RateResult minimize_path_rate(const ModelSpec& spec, const Grid& grid,
                              std::span<const double> g, const SolverOptions& opts = {});

// I_T over a list of targets with continuation warm starts.
std::vector<std::pair<double, double>> rate_profile(const ModelSpec& spec, const Grid& grid,
                                                    std::span<const double> xs,
                                                    const SolverOptions& opts = {});

}  // namespace vldp
