#include "vldp/functionals.hpp"

#include <cmath>

namespace vldp {

FunctionalValues compute_efg(const ModelSpec& spec, const KernelWeights& weights,
                             const ControlPath& ctrl) {
  const auto vhat = check_operator(spec, weights, ctrl);
  const std::size_t n = ctrl.grid.n_steps;
  const double dt = ctrl.grid.dt();
  FunctionalValues out;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = eval_function(spec.sigma_fn, vhat[i]);
    const double d = ctrl.fdot[i];
    out.energy += d * d;
    out.total_variance += s * s;
    out.covariation += s * d;
  }
  out.energy *= dt;
  out.total_variance *= dt;
  out.covariation *= dt;
  return out;
}

double inner_objective_from(const ModelSpec& spec, const FunctionalValues& efg, double x) {
  const double rb = spec.rho_bar();
  const double a = x - spec.rho * efg.covariation;
  return a * a / (2.0 * rb * rb * efg.total_variance) + 0.5 * efg.energy;
}

double inner_objective(const ModelSpec& spec, const KernelWeights& weights,
                       const ControlPath& ctrl, double x) {
  return inner_objective_from(spec, compute_efg(spec, weights, ctrl), x);
}

double path_rate_integrand(const ModelSpec& spec, const KernelWeights& weights,
                           const ControlPath& ctrl, std::span<const double> g) {
  const std::size_t n = ctrl.grid.n_steps;
  if (g.size() != n + 1)
    throw dimension_error("path_rate_integrand: target path must have n+1 values");
  const double dt = ctrl.grid.dt();
  const double rb = spec.rho_bar();
  const auto vhat = check_operator(spec, weights, ctrl);
  double first = 0.0, energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = eval_function(spec.sigma_fn, vhat[i]);
    const double gdot = (g[i + 1] - g[i]) / dt;
    const double a = (gdot - spec.rho * s * ctrl.fdot[i]) / (rb * s);
    first += a * a;
    energy += ctrl.fdot[i] * ctrl.fdot[i];
  }
  return 0.5 * dt * (first + energy);
}

double phi_functional(const ModelSpec& spec, const KernelWeights& weights, double y,
                      const ControlPath& ctrl) {
  const auto efg = compute_efg(spec, weights, ctrl);
  return spec.rho_bar() * std::sqrt(efg.total_variance) * y + spec.rho * efg.covariation;
}

namespace {

double interp(const Grid& grid, std::span<const double> path, double t) {
  const double dt = grid.dt();
  if (t <= 0.0) return path[0];
  if (t >= grid.horizon) return path[grid.n_steps];
  const double pos = t / dt;
  const std::size_t k = static_cast<std::size_t>(pos);
  const double w = pos - static_cast<double>(k);
  return path[k] * (1.0 - w) + path[k + 1] * w;
}

}  // namespace

double phi_path_functional(const ModelSpec& spec, const Grid& grid,
                           std::span<const double> r, std::span<const double> h,
                           std::span<const double> l, double t) {
  const std::size_t n = grid.n_steps;
  if (r.size() != n + 1 || h.size() != n + 1 || l.size() != n + 1)
    throw dimension_error("phi_path_functional: paths must have n+1 values");
  if (t < 0.0 || t > grid.horizon)
    throw dimension_error("phi_path_functional: t outside [0,T]");
  double acc_r = 0.0, acc_h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = grid.t(i);
    if (ti >= t) break;
    const double right = std::min(grid.t(i + 1), t);
    const double s = eval_function(spec.sigma_fn, l[i]);
    // increments of r, h over [t_i, right], interpolated at a partial cell
    const double r_right = (right == grid.t(i + 1)) ? r[i + 1] : interp(grid, r, right);
    const double h_right = (right == grid.t(i + 1)) ? h[i + 1] : interp(grid, h, right);
    acc_r += s * (r_right - r[i]);
    acc_h += s * (h_right - h[i]);
  }
  return spec.rho_bar() * acc_r + spec.rho * acc_h;
}

double phi_m_functional(const ModelSpec& spec, const Grid& grid, std::size_t m,
                        std::span<const double> r, std::span<const double> h,
                        std::span<const double> l, double t) {
  const std::size_t n = grid.n_steps;
  if (r.size() != n + 1 || h.size() != n + 1 || l.size() != n + 1)
    throw dimension_error("phi_m_functional: paths must have n+1 values");
  if (m == 0 || n % m != 0)
    throw dimension_error("phi_m_functional: m must divide the fine grid");
  if (t < 0.0 || t > grid.horizon)
    throw dimension_error("phi_m_functional: t outside [0,T]");

  const double T = grid.horizon;
  const std::size_t stride = n / m;
  // Xi(t) = (T/m) floor(m t / T), snapped to the coarse grid
  std::size_t k_cut = static_cast<std::size_t>(std::floor(m * t / T + 1e-12));
  if (k_cut > m) k_cut = m;
  const double xi = T * static_cast<double>(k_cut) / static_cast<double>(m);

  double acc_r = 0.0, acc_h = 0.0;
  for (std::size_t k = 0; k < k_cut; ++k) {
    const std::size_t a = k * stride, b = (k + 1) * stride;
    const double s = eval_function(spec.sigma_fn, l[a]);
    acc_r += s * (r[b] - r[a]);
    acc_h += s * (h[b] - h[a]);
  }
  if (t > xi) {
    const std::size_t a = k_cut * stride;
    const double s = eval_function(spec.sigma_fn, l[a]);
    acc_r += s * (interp(grid, r, t) - r[a]);
    acc_h += s * (interp(grid, h, t) - h[a]);
  }
  return spec.rho_bar() * acc_r + spec.rho * acc_h;
}

}  // namespace vldp
