#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

namespace vldp {

// Limited-memory BFGS with a strong-Wolfe line search. The objective
// callback fills the gradient and returns the value.
struct LbfgsOptions {
  double gtol = 1e-7;          // max-norm of gradient
  double ftol = 1e-10;         // relative objective decrease
  std::size_t max_iterations = 2000;
  std::size_t memory = 10;
  std::size_t max_line_search = 40;
};

struct LbfgsResult {
  std::vector<double> x;
  double value = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> history;  // objective per accepted iterate
};

using GradObjective = std::function<double(const std::vector<double>&, std::vector<double>&)>;

inline LbfgsResult lbfgs_minimize(const GradObjective& fg, std::vector<double> x0,
                                  const LbfgsOptions& opts = {}) {
  const std::size_t dim = x0.size();
  LbfgsResult res;
  res.x = std::move(x0);

  std::vector<double> g(dim, 0.0), x_new(dim), g_new(dim), dir(dim);
  double f = fg(res.x, g);
  res.history.push_back(f);

  auto max_norm = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
  };
  auto dot = [dim](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
  };

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  const double c1 = 1e-4, c2 = 0.9;
  std::size_t it = 0;
  for (; it < opts.max_iterations; ++it) {
    res.gradient_norm = max_norm(g);
    if (res.gradient_norm <= opts.gtol) {
      res.converged = true;
      break;
    }

    // two-loop recursion
    dir = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * dot(s_hist[k], dir);
      for (std::size_t i = 0; i < dim; ++i) dir[i] -= alpha[k] * y_hist[k][i];
    }
    if (!s_hist.empty()) {
      const double ys = dot(y_hist.back(), s_hist.back());
      const double yy = dot(y_hist.back(), y_hist.back());
      const double scale = ys / std::max(yy, 1e-300);
      for (double& d : dir) d *= scale;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * dot(y_hist[k], dir);
      for (std::size_t i = 0; i < dim; ++i) dir[i] += s_hist[k][i] * (alpha[k] - beta);
    }
    for (double& d : dir) d = -d;

    double dg = dot(dir, g);
    if (!(dg < 0.0)) {  // not a descent direction: restart from steepest descent
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t i = 0; i < dim; ++i) dir[i] = -g[i];
      dg = dot(dir, g);
      if (!(dg < 0.0)) break;  // zero gradient within rounding
    }

    // strong Wolfe line search with bracketing + bisection/interpolation
    double step = 1.0;
    double f_new = f;
    double lo = 0.0, hi = 0.0;
    bool have_hi = false;
    bool accepted = false;
    double f_lo = f;
    for (std::size_t ls = 0; ls < opts.max_line_search; ++ls) {
      for (std::size_t i = 0; i < dim; ++i) x_new[i] = res.x[i] + step * dir[i];
      f_new = fg(x_new, g_new);
      const double dg_new = dot(dir, g_new);
      if (f_new > f + c1 * step * dg || (ls > 0 && f_new >= f_lo && have_hi)) {
        hi = step;
        have_hi = true;
        step = 0.5 * (lo + step);
        continue;
      }
      if (std::abs(dg_new) <= -c2 * dg) {
        accepted = true;
        break;
      }
      if (dg_new >= 0.0) {
        hi = lo;
        have_hi = true;
        lo = step;
        f_lo = f_new;
        step = 0.5 * (lo + hi);
      } else {
        lo = step;
        f_lo = f_new;
        step = have_hi ? 0.5 * (lo + hi) : step * 2.0;
      }
    }
    if (!accepted && !(f_new < f)) break;  // line search failed to improve

    // curvature update
    std::vector<double> s_vec(dim), y_vec(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      s_vec[i] = x_new[i] - res.x[i];
      y_vec[i] = g_new[i] - g[i];
    }
    const double ys = dot(y_vec, s_vec);
    if (ys > 1e-12 * std::sqrt(dot(y_vec, y_vec)) * std::sqrt(dot(s_vec, s_vec))) {
      s_hist.push_back(std::move(s_vec));
      y_hist.push_back(std::move(y_vec));
      rho_hist.push_back(1.0 / ys);
      if (s_hist.size() > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    const double f_prev = f;
    res.x = x_new;
    g = g_new;
    f = f_new;
    res.history.push_back(f);
    if (std::abs(f_prev - f) <= opts.ftol * (1.0 + std::abs(f))) {
      res.gradient_norm = max_norm(g);
      res.converged = res.gradient_norm <= std::max(opts.gtol, 1e-5 * (1.0 + std::abs(f)));
      ++it;
      break;
    }
  }
  res.value = f;
  res.iterations = it;
  res.gradient_norm = max_norm(g);
  if (res.gradient_norm <= opts.gtol) res.converged = true;
  return res;
}

}  // namespace vldp
