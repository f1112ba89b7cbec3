#include "vldp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "vldp/rng.hpp"

namespace vldp {

ControlPath::ControlPath(Grid g, std::vector<double> d) : grid(g), fdot(std::move(d)) {
  if (fdot.size() != grid.n_steps)
    throw dimension_error("control path needs one derivative value per cell");
}

double ControlPath::energy() const {
  double acc = 0.0;
  for (double d : fdot) acc += d * d;
  return acc * grid.dt();
}

std::vector<double> ControlPath::values() const {
  std::vector<double> f(grid.n_steps + 1, 0.0);
  const double dt = grid.dt();
  for (std::size_t i = 0; i < grid.n_steps; ++i) f[i + 1] = f[i] + dt * fdot[i];
  return f;
}

DriverPath solve_control_ode(const ModelSpec& spec, const KernelWeights& weights,
                             const ControlPath& ctrl) {
  if (!(weights.grid() == ctrl.grid))
    throw dimension_error("solve_control_ode: control and weights use different grids");
  const Grid& grid = ctrl.grid;
  const std::size_t n = grid.n_steps;
  const double dt = grid.dt();
  const bool truncate = spec.needs_truncation();

  DriverPath out;
  out.grid = grid;
  out.v.assign(n + 1, 0.0);
  out.v[0] = spec.v0;
  std::vector<double> u(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double vi = out.v[i];
    u[i] = eval_function(spec.u_fn, vi);
    double next = vi + dt * eval_function(spec.drift_fn, vi) +
                  dt * eval_function(spec.disp_fn, vi) * ctrl.fdot[i];
    if (truncate && next < 0.0) next = 0.0;
    if (!std::isfinite(next))
      throw divergence_error("control ODE state is not finite", i + 1);
    out.v[i + 1] = next;
  }
  out.vhat = weights.apply(u);
  return out;
}

std::vector<double> check_operator(const ModelSpec& spec, const KernelWeights& weights,
                                   const ControlPath& ctrl) {
  return solve_control_ode(spec, weights, ctrl).vhat;
}

ControlPath inverse_control(const ModelSpec& spec, const Grid& grid,
                            std::span<const double> driver_values) {
  if (driver_values.size() != grid.n_steps + 1)
    throw dimension_error("inverse_control: driver path must have n+1 values");
  const double dt = grid.dt();
  std::vector<double> fdot(grid.n_steps, 0.0);
  for (std::size_t i = 0; i < grid.n_steps; ++i) {
    const double vi = driver_values[i];
    const double disp = eval_function(spec.disp_fn, vi);
    const double num = (driver_values[i + 1] - vi) / dt - eval_function(spec.drift_fn, vi);
    if (disp <= 0.0) {
      if (num == 0.0) {
        fdot[i] = 0.0;  // absorbed driver, stationary step
        continue;
      }
      throw singular_control_error("dispersion vanishes along the driver path", i);
    }
    fdot[i] = num / disp;
  }
  return ControlPath(grid, std::move(fdot));
}

unsigned resolve_thread_count(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

PathBatch simulate_batch(const ModelSpec& spec, const KernelWeights& weights,
                         double epsilon, std::size_t n_paths, std::uint64_t seed,
                         const SimulateOptions& opts) {
  if (epsilon < 0.0) throw dimension_error("simulate_batch: epsilon must be nonnegative");
  if (n_paths == 0) throw dimension_error("simulate_batch: need at least one path");
  const Grid& grid = weights.grid();
  const std::size_t n = grid.n_steps;
  const double dt = grid.dt();
  const double sqeps = std::sqrt(epsilon);
  const double sqdt = std::sqrt(dt);
  const double rho = spec.rho;
  const double rho_bar = spec.rho_bar();
  const bool truncate = spec.needs_truncation();

  PathBatch batch;
  batch.epsilon = epsilon;
  batch.n_paths = n_paths;
  batch.terminal_logprice.assign(n_paths, 0.0);
  if (opts.keep_full_paths) batch.full_paths.assign(n_paths, {});

  auto run_range = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> u(n), db(n), dw(n), vhat, x;
    if (opts.keep_full_paths) x.assign(n + 1, 0.0);
    for (std::size_t p = lo; p < hi; ++p) {
      Rng rng(seed, p);
      // driver first: each step draws (dB, dW) in that order
      double vi = spec.v0;
      for (std::size_t i = 0; i < n; ++i) {
        db[i] = sqdt * rng.next_normal();
        dw[i] = sqdt * rng.next_normal();
        u[i] = eval_function(spec.u_fn, vi);
        double next = vi + dt * eval_function(spec.drift_fn, vi) +
                      sqeps * eval_function(spec.disp_fn, vi) * db[i];
        if (truncate && next < 0.0) next = 0.0;
        if (!std::isfinite(next))
          throw divergence_error("simulated driver is not finite", i + 1);
        vi = next;
      }
      vhat = weights.apply(u);
      // log-price along the same Brownian increments
      double xt = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = eval_function(spec.sigma_fn, vhat[i]);
        xt += -0.5 * epsilon * s * s * dt + sqeps * s * (rho_bar * dw[i] + rho * db[i]);
        if (opts.keep_full_paths) x[i + 1] = xt;
      }
      if (!std::isfinite(xt))
        throw divergence_error("simulated log-price is not finite", n);
      batch.terminal_logprice[p] = xt;
      if (opts.keep_full_paths) batch.full_paths[p] = x;
    }
  };

  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(resolve_thread_count(opts.n_threads), n_paths));
  if (threads <= 1) {
    run_range(0, n_paths);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::mutex mu;
    std::exception_ptr first_error;
    const std::size_t chunk = (n_paths + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t lo = std::min<std::size_t>(t * chunk, n_paths);
      const std::size_t hi = std::min<std::size_t>(lo + chunk, n_paths);
      if (lo < hi)
        pool.emplace_back([&, lo, hi] {
          try {
            run_range(lo, hi);
          } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!first_error) first_error = std::current_exception();
          }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }
  return batch;
}

}  // namespace vldp
