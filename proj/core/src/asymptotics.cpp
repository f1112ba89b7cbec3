#include "vldp/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vldp {

double strike_exponent(double beta) {
  if (!(beta > 0.0 && beta < 0.5))
    throw std::domain_error("strike_exponent: beta must lie in (0, 1/2)");
  return 1.0 / (beta + 0.5);
}

double call_price_asymptote(const StrikeAsymptotics& sa, double strike) {
  if (!(strike > 1.0))
    throw std::domain_error("call_price_asymptote: strike must exceed 1");
  return std::exp(-sa.i1 * std::pow(std::log(strike), sa.gamma));
}

ScalingReport scaling_check(const ModelSpec& spec, const Grid& grid,
                            std::span<const double> cs, const SolverOptions& opts) {
  if (!spec.is_scaling_special_case())
    throw std::invalid_argument("scaling_check: model is not the scaling special case");

  for (double c : cs)
    if (!(c > 0.0))
      throw std::invalid_argument("scaling_check: tail levels must be positive");

  ScalingReport rep;
  rep.gamma = strike_exponent(spec.sigma_fn.b);

  // continuation over increasing |c|, with c = 1 always solved
  std::vector<double> levels(cs.begin(), cs.end());
  if (std::find(levels.begin(), levels.end(), 1.0) == levels.end()) levels.push_back(1.0);
  std::sort(levels.begin(), levels.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });

  SolverOptions local = opts;
  std::vector<std::pair<double, RateResult>> solved;
  for (double c : levels) {
    RateResult r = minimize_scalar_rate(spec, grid, c, local);
    local.warm_start = r.minimizer.fdot;
    solved.emplace_back(c, std::move(r));
  }

  for (const auto& [c, r] : solved)
    if (c == 1.0) rep.rate_at_one = r.value;

  for (double c : cs) {
    const auto it = std::find_if(solved.begin(), solved.end(),
                                 [c](const auto& p) { return p.first == c; });
    ScalingRow row;
    row.c = c;
    row.rate = it->second.value;
    row.predicted = std::pow(c, rep.gamma) * rep.rate_at_one;
    row.rel_deviation = std::abs(row.rate - row.predicted) / row.predicted;
    row.converged = it->second.converged;
    rep.rows.push_back(row);
  }
  return rep;
}

TaylorReport taylor_check(const ModelSpec& spec, const Grid& grid,
                          std::span<const double> xs, const SolverOptions& opts) {
  if (!spec.is_taylor_special_case())
    throw std::invalid_argument("taylor_check: model is not the Taylor special case");

  TaylorReport rep;
  const double sigma0 = eval_function(spec.sigma_fn, 0.0);
  rep.q_target = 1.0 / (2.0 * sigma0 * sigma0);
  rep.slope_target = spec.rho / sigma0;

  SolverOptions local = opts;
  double prev_x = 0.0;
  std::vector<RateResult> results;
  for (double x : xs) {
    if (local.warm_start && prev_x != 0.0) {
      // the minimizer is approximately linear in x near 0
      auto scaled = *local.warm_start;
      for (auto& v : scaled) v *= x / prev_x;
      local.warm_start = scaled;
    }
    RateResult r = minimize_scalar_rate(spec, grid, x, local);
    local.warm_start = r.minimizer.fdot;
    prev_x = x;
    rep.rows.push_back({x, r.value, r.converged});
    results.push_back(std::move(r));
  }

  // least squares for rate = q x^2 + r x^3
  double s22 = 0.0, s23 = 0.0, s33 = 0.0, b2 = 0.0, b3 = 0.0;
  for (const auto& row : rep.rows) {
    const double x2 = row.x * row.x, x3 = x2 * row.x;
    s22 += x2 * x2;
    s23 += x2 * x3;
    s33 += x3 * x3;
    b2 += row.rate * x2;
    b3 += row.rate * x3;
  }
  const double det = s22 * s33 - s23 * s23;
  if (det != 0.0) {
    rep.q = (b2 * s33 - b3 * s23) / det;
    rep.r = (s22 * b3 - s23 * b2) / det;
  } else if (s22 > 0.0) {
    rep.q = b2 / s22;  // all |x| equal: quadratic fit only
    rep.r = 0.0;
  }
  rep.q_rel_err = std::abs(rep.q - rep.q_target) / rep.q_target;

  // minimizer slope at the smallest nonzero |x|
  std::size_t k_min = rep.rows.size();
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    if (rep.rows[k].x == 0.0) continue;
    if (k_min == rep.rows.size() || std::abs(rep.rows[k].x) < std::abs(rep.rows[k_min].x))
      k_min = k;
  }
  if (k_min == rep.rows.size()) return rep;
  const double x_min = rep.rows[k_min].x;
  rep.slope_x = x_min;
  const auto f = results[k_min].minimizer.values();
  double stt = 0.0, sft = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    const double t = grid.t(i);
    stt += t * t;
    sft += (f[i] / x_min) * t;
  }
  rep.slope = sft / stt;
  for (std::size_t i = 0; i < f.size(); ++i)
    rep.max_abs_dev =
        std::max(rep.max_abs_dev, std::abs(f[i] / x_min - rep.slope_target * grid.t(i)));
  return rep;
}

}  // namespace vldp
