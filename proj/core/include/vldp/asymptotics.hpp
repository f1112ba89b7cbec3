#pragma once

#include <vector>

#include "vldp/rate_solver.hpp"

namespace vldp {

// gamma = 1 / (beta + 1/2), in (1,2) for beta in (0, 1/2).
double strike_exponent(double beta);

// Large-strike machinery for the scaling special case: digital and vanilla
// calls share the leading log-asymptote exp(-I1 (log K)^gamma).
struct StrikeAsymptotics {
  double beta = 0.0;
  double gamma = 0.0;
  double i1 = 0.0;  // I_T(1)
};

double call_price_asymptote(const StrikeAsymptotics& sa, double strike);

struct ScalingRow {
  double c = 0.0;
  double rate = 0.0;        // I_T(c)
  double predicted = 0.0;   // c^gamma I_T(1)
  double rel_deviation = 0.0;
  bool converged = false;
};

struct ScalingReport {
  double gamma = 0.0;
  double rate_at_one = 0.0;
  std::vector<ScalingRow> rows;
};

// Solves I_T(c) for each requested level and compares against the power
// scaling through I_T(1). Requires a scaling-special-case model.
ScalingReport scaling_check(const ModelSpec& spec, const Grid& grid,
                            std::span<const double> cs, const SolverOptions& opts = {});

struct TaylorRow {
  double x = 0.0;
  double rate = 0.0;
  bool converged = false;
};

struct TaylorReport {
  std::vector<TaylorRow> rows;
  double q = 0.0;              // fitted quadratic coefficient
  double r = 0.0;              // fitted cubic coefficient
  double q_target = 0.0;       // 1 / (2 sigma0^2)
  double q_rel_err = 0.0;
  // minimizer shape at the smallest |x|: f(t)/x against slope * t
  double slope = 0.0;
  double slope_target = 0.0;   // rho / sigma0
  double slope_x = 0.0;        // the x used for the slope diagnostics
  double max_abs_dev = 0.0;    // max_t | f(t)/x - slope_target * t |
};

// Fits rate(x) = q x^2 + r x^3 over the requested targets and reports the
// quadratic coefficient against 1/(2 sigma0^2), plus the minimizer slope
// against rho/sigma0. Requires the Taylor special-case model.
TaylorReport taylor_check(const ModelSpec& spec, const Grid& grid,
                          std::span<const double> xs, const SolverOptions& opts = {});

}  // namespace vldp
