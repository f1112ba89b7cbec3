#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vldp/dynamics.hpp"

namespace vldp {

// 95% Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n_paths);

struct TailEstimate {
  double epsilon = 0.0;
  double threshold = 0.0;
  std::size_t n_paths = 0;
  std::size_t hits = 0;
  double p_hat = 0.0;
  std::pair<double, double> wilson_ci{0.0, 0.0};
  double eps_log_p = 0.0;                      // -inf sentinel when p_hat = 0
  std::pair<double, double> eps_log_ci{0.0, 0.0};
  bool no_hits = false;                        // increase n_paths or epsilon
};

struct MonteCarloOptions {
  unsigned n_threads = 0;
};

// p_hat = fraction of simulated terminal log-prices >= c.
TailEstimate estimate_tail(const ModelSpec& spec, const Grid& grid, double epsilon, double c,
                           std::size_t n_paths, std::uint64_t seed,
                           const MonteCarloOptions& opts = {});

struct LadderStudy {
  std::vector<TailEstimate> rows;
  // Extrapolation of eps*log(p) to eps = 0. The subexponential prefactor
  // contributes an eps*log(eps) term, so the fit basis is
  // {1, eps, eps log eps} (>= 4 usable rungs) or {1, eps} with the
  // eps log eps coefficient pinned at the Laplace value 1/2 (2-3 rungs).
  bool summary_valid = false;   // fit needs >= 2 usable rungs
  bool healthy = false;         // >= 3 rungs with p_hat > 10 / n_paths
  double intercept = 0.0;       // prefactor-aware extrapolation
  double slope = 0.0;
  double raw_intercept = 0.0;   // plain linear fit, for reference
  double max_residual = 0.0;    // fit residual, max over rungs
};

// Runs estimate_tail down a decreasing epsilon ladder and extrapolates
// eps*log(p) toward eps = 0.
LadderStudy ldp_convergence_study(const ModelSpec& spec, const Grid& grid, double c,
                                  std::span<const double> eps_ladder, std::size_t n_paths,
                                  std::uint64_t seed, const MonteCarloOptions& opts = {});

}  // namespace vldp
