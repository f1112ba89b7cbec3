#include "vldp/rate_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <limits>
#include <thread>

#include "vldp/lbfgs.hpp"
#include "vldp/rng.hpp"

namespace vldp {

RateProblem::RateProblem(ModelSpec spec, Grid grid)
    : spec_(std::move(spec)), grid_(grid), weights_(build_weights(spec_.kernel, grid_)) {}

namespace {

struct Forward {
  std::vector<double> v;      // n+1 driver values
  std::vector<double> u;      // n, U of left values
  std::vector<double> vhat;   // n+1
  std::vector<double> s;      // n, sigma at left vhat values
  std::vector<char> active;   // n, step survived truncation
  bool touched_zero = false;
};

void forward_pass(const ModelSpec& spec, const KernelWeights& w,
                  const std::vector<double>& c, Forward& fw) {
  const Grid& grid = w.grid();
  const std::size_t n = grid.n_steps;
  const double dt = grid.dt();
  const bool truncate = spec.needs_truncation();
  fw.v.assign(n + 1, 0.0);
  fw.u.assign(n, 0.0);
  fw.s.assign(n, 0.0);
  fw.active.assign(n, 1);
  fw.touched_zero = false;
  fw.v[0] = spec.v0;
  for (std::size_t i = 0; i < n; ++i) {
    const double vi = fw.v[i];
    fw.u[i] = eval_function(spec.u_fn, vi);
    double next = vi + dt * eval_function(spec.drift_fn, vi) +
                  dt * eval_function(spec.disp_fn, vi) * c[i];
    if (truncate && next < 0.0) {
      next = 0.0;
      fw.active[i] = 0;
      fw.touched_zero = true;
    }
    if (!std::isfinite(next)) throw divergence_error("control ODE state is not finite", i + 1);
    fw.v[i + 1] = next;
  }
  fw.vhat = w.apply(fw.u);
  for (std::size_t i = 0; i < n; ++i) fw.s[i] = eval_function(spec.sigma_fn, fw.vhat[i]);
}

// Reverse sweep shared by both objectives. ds[i] is d obj / d s_i and
// grad[] already holds the direct d obj / d c_i terms on entry.
void backward_chain(const ModelSpec& spec, const KernelWeights& w, const Forward& fw,
                    const std::vector<double>& c, std::vector<double>& ds,
                    std::vector<double>& grad) {
  const Grid& grid = w.grid();
  const std::size_t n = grid.n_steps;
  const double dt = grid.dt();

  // through sigma: d obj / d vhat_i
  std::vector<double> dvhat(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    dvhat[i] = ds[i] * eval_derivative(spec.sigma_fn, fw.vhat[i]);

  // transpose of the weight matrix: d obj / d u_j
  std::vector<double> du(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double gi = dvhat[i];
    if (gi == 0.0) continue;
    const auto row = w.row(i);
    for (std::size_t j = 0; j < i; ++j) du[j] += gi * row[j];
  }

  // adjoint of the Euler recursion
  double lambda_next = 0.0;  // d obj / d v_{j+1}
  for (std::size_t j = n; j-- > 0;) {
    const double vj = fw.v[j];
    if (fw.active[j]) {
      grad[j] += lambda_next * dt * eval_function(spec.disp_fn, vj);
    }
    double lambda_j = du[j] * eval_derivative(spec.u_fn, vj);
    if (fw.active[j]) {
      lambda_j += lambda_next * (1.0 + dt * eval_derivative(spec.drift_fn, vj) +
                                 dt * eval_derivative(spec.disp_fn, vj) * c[j]);
    }
    lambda_next = lambda_j;
  }
}

}  // namespace

double RateProblem::scalar_objective(const std::vector<double>& fdot, double x,
                                     std::vector<double>* grad) const {
  const std::size_t n = grid_.n_steps;
  if (fdot.size() != n) throw dimension_error("scalar_objective: control size mismatch");
  const double dt = grid_.dt();
  const double rb = spec_.rho_bar();
  const double rho = spec_.rho;

  Forward fw;
  forward_pass(spec_, weights_, fdot, fw);

  double E = 0.0, F = 0.0, G = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    E += fdot[i] * fdot[i];
    F += fw.s[i] * fw.s[i];
    G += fw.s[i] * fdot[i];
  }
  E *= dt;
  F *= dt;
  G *= dt;
  const double a = x - rho * G;
  const double obj = a * a / (2.0 * rb * rb * F) + 0.5 * E;

  if (grad) {
    grad->assign(n, 0.0);
    const double dG = -rho * a / (rb * rb * F);
    const double dF = -a * a / (2.0 * rb * rb * F * F);
    std::vector<double> ds(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      ds[i] = dF * 2.0 * dt * fw.s[i] + dG * dt * fdot[i];
      (*grad)[i] = dt * fdot[i] + dG * dt * fw.s[i];
    }
    backward_chain(spec_, weights_, fw, fdot, ds, *grad);
  }
  return obj;
}

double RateProblem::path_objective(const std::vector<double>& fdot, std::span<const double> g,
                                   std::vector<double>* grad) const {
  const std::size_t n = grid_.n_steps;
  if (fdot.size() != n) throw dimension_error("path_objective: control size mismatch");
  if (g.size() != n + 1) throw dimension_error("path_objective: target path size mismatch");
  const double dt = grid_.dt();
  const double rb = spec_.rho_bar();
  const double rho = spec_.rho;

  Forward fw;
  forward_pass(spec_, weights_, fdot, fw);

  double first = 0.0, E = 0.0;
  std::vector<double> a(n, 0.0), gdot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    gdot[i] = (g[i + 1] - g[i]) / dt;
    a[i] = (gdot[i] - rho * fw.s[i] * fdot[i]) / (rb * fw.s[i]);
    first += a[i] * a[i];
    E += fdot[i] * fdot[i];
  }
  const double obj = 0.5 * dt * (first + E);

  if (grad) {
    grad->assign(n, 0.0);
    std::vector<double> ds(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      (*grad)[i] = dt * a[i] * (-rho / rb) + dt * fdot[i];
      ds[i] = dt * a[i] * (-gdot[i] / (rb * fw.s[i] * fw.s[i]));
    }
    backward_chain(spec_, weights_, fw, fdot, ds, *grad);
  }
  return obj;
}

std::vector<double> RateProblem::scalar_gradient_fd(const std::vector<double>& fdot,
                                                    double x) const {
  double amp = 0.0;
  for (double d : fdot) amp = std::max(amp, std::abs(d));
  const double h = 1e-6 * (1.0 + amp);
  std::vector<double> g(fdot.size(), 0.0), probe = fdot;
  for (std::size_t j = 0; j < fdot.size(); ++j) {
    probe[j] = fdot[j] + h;
    const double up = scalar_objective(probe, x, nullptr);
    probe[j] = fdot[j] - h;
    const double dn = scalar_objective(probe, x, nullptr);
    probe[j] = fdot[j];
    g[j] = (up - dn) / (2.0 * h);
  }
  return g;
}

bool RateProblem::driver_touches_zero(const std::vector<double>& fdot) const {
  Forward fw;
  forward_pass(spec_, weights_, fdot, fw);
  return fw.touched_zero;
}

namespace {

struct StartList {
  std::vector<std::vector<double>> starts;
};

double constant_control_objective(const RateProblem& prob, double a, double x) {
  std::vector<double> c(prob.grid().n_steps, a);
  return prob.scalar_objective(c, x, nullptr);
}

// 1-d scan over constant controls; cheap and lands near the optimum for
// every registered family.
double best_constant_control(const RateProblem& prob, double x, double scale) {
  double best_a = 0.0;
  double best = constant_control_objective(prob, 0.0, x);
  for (int sign = -1; sign <= 1; sign += 2) {
    for (int k = -8; k <= 16; ++k) {
      const double a = sign * scale * std::pow(1.35, k);
      const double val = constant_control_objective(prob, a, x);
      if (val < best) {
        best = val;
        best_a = a;
      }
    }
  }
  return best_a;
}

StartList scalar_starts(const RateProblem& prob, double x, const SolverOptions& opts) {
  const ModelSpec& spec = prob.spec();
  const Grid& grid = prob.grid();
  const std::size_t n = grid.n_steps;
  StartList sl;

  sl.starts.emplace_back(n, 0.0);  // (i) zero control

  // (ii) constant-spot-vol analytic minimizer and scaled variants
  const auto vhat0 = check_operator(spec, prob.weights(), ControlPath::zero(grid));
  const double sigma_T = eval_function(spec.sigma_fn, vhat0[n]);
  const double a_bs = spec.rho * x / (sigma_T * grid.horizon);
  for (double sc : {1.0, 0.5, 2.0}) sl.starts.emplace_back(n, a_bs * sc);

  // constant-control scan
  const double scale = std::max({std::abs(x) / (sigma_T * grid.horizon), std::abs(x), 0.25});
  const double a_scan = best_constant_control(prob, x, 0.05 * scale + 1e-12);
  sl.starts.emplace_back(n, a_scan);

  // (iii) seeded random perturbations around the scan anchor
  const double amp = 0.35 * (std::abs(a_scan) + std::abs(a_bs)) + 0.1 * scale;
  for (std::size_t k = 0; k < opts.extra_starts; ++k) {
    Rng rng(opts.seed, 0x5157ULL + k);
    std::vector<double> c(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) c[j] = a_scan + amp * rng.next_normal();
    sl.starts.push_back(std::move(c));
  }

  if (opts.warm_start && opts.warm_start->size() == n) sl.starts.push_back(*opts.warm_start);
  return sl;
}

RateResult run_multistart(const RateProblem& prob, const StartList& sl,
                          const SolverOptions& opts,
                          const std::function<double(const std::vector<double>&, std::vector<double>&)>& fg) {
  LbfgsOptions lopts;
  lopts.gtol = opts.gtol;
  lopts.ftol = opts.ftol;
  lopts.max_iterations = opts.max_iterations;

  const unsigned workers =
      std::min<unsigned>(resolve_thread_count(opts.n_threads), static_cast<unsigned>(sl.starts.size()));

  // objective probes at wild controls may overflow: treat them as +inf so
  // the line search backs off instead of aborting the solve
  auto guarded = [&fg](const std::vector<double>& c, std::vector<double>& g) -> double {
    try {
      return fg(c, g);
    } catch (const divergence_error&) {
      g.assign(c.size(), 0.0);
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<LbfgsResult> results(sl.starts.size());
  auto run_one = [&](std::size_t k) { results[k] = lbfgs_minimize(guarded, sl.starts[k], lopts); };

  if (workers <= 1) {
    for (std::size_t k = 0; k < sl.starts.size(); ++k) run_one(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        try {
          for (std::size_t k = next.fetch_add(1); k < sl.starts.size(); k = next.fetch_add(1))
            run_one(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first_error) first_error = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k < results.size(); ++k)
    if (results[k].value < results[best].value) best = k;

  RateResult out;
  out.value = results[best].value;
  out.minimizer = ControlPath(prob.grid(), results[best].x);
  out.n_starts = sl.starts.size();
  out.converged = results[best].converged;
  out.gradient_norm = results[best].gradient_norm;
  out.objective_history = results[best].history;
  out.driver_touched_zero = prob.driver_touches_zero(results[best].x);
  return out;
}

}  // namespace

RateResult minimize_scalar_rate(const ModelSpec& spec, const Grid& grid, double x,
                                const SolverOptions& opts) {
  RateProblem prob(spec, grid);
  const auto sl = scalar_starts(prob, x, opts);

  auto fg = [&prob, x, &opts](const std::vector<double>& c, std::vector<double>& g) {
    if (opts.use_fd_gradient) {
      g = prob.scalar_gradient_fd(c, x);
      return prob.scalar_objective(c, x, nullptr);
    }
    return prob.scalar_objective(c, x, &g);
  };

  RateResult out = run_multistart(prob, sl, opts, fg);
  out.target = x;
  return out;
}

RateResult minimize_path_rate(const ModelSpec& spec, const Grid& grid,
                              std::span<const double> g, const SolverOptions& opts) {
  if (g.size() != grid.n_steps + 1)
    throw dimension_error("minimize_path_rate: target path must have n+1 values");
  if (g[0] != 0.0) throw dimension_error("minimize_path_rate: target path must start at 0");
  RateProblem prob(spec, grid);

  StartList sl;
  sl.starts.emplace_back(grid.n_steps, 0.0);
  const double gt = g[grid.n_steps];
  const auto vhat0 = check_operator(spec, prob.weights(), ControlPath::zero(grid));
  const double sigma_T = eval_function(spec.sigma_fn, vhat0[grid.n_steps]);
  const double a_bs = spec.rho * gt / (sigma_T * grid.horizon);
  sl.starts.emplace_back(grid.n_steps, a_bs);
  for (std::size_t k = 0; k < opts.extra_starts; ++k) {
    Rng rng(opts.seed, 0x9A7EULL + k);
    std::vector<double> c(grid.n_steps, 0.0);
    const double amp = 0.35 * std::abs(a_bs) + 0.1;
    for (auto& cj : c) cj = a_bs + amp * rng.next_normal();
    sl.starts.push_back(std::move(c));
  }
  if (opts.warm_start && opts.warm_start->size() == grid.n_steps)
    sl.starts.push_back(*opts.warm_start);

  std::vector<double> target(g.begin(), g.end());
  auto fg = [&prob, &target](const std::vector<double>& c, std::vector<double>& grad) {
    return prob.path_objective(c, target, &grad);
  };

  RateResult out = run_multistart(prob, sl, opts, fg);
  out.target = 0.0;
  out.target_path = target;
  return out;
}

std::vector<std::pair<double, double>> rate_profile(const ModelSpec& spec, const Grid& grid,
                                                    std::span<const double> xs,
                                                    const SolverOptions& opts) {
  std::vector<std::pair<double, double>> out;
  out.reserve(xs.size());
  SolverOptions local = opts;
  for (double x : xs) {
    RateResult r = minimize_scalar_rate(spec, grid, x, local);
    local.warm_start = r.minimizer.fdot;
    out.emplace_back(x, r.value);
  }
  return out;
}

}  // namespace vldp
