#include "vldp/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vldp {

std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n_paths) {
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double n = static_cast<double>(n_paths);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  const double lo = hits == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = hits == n_paths ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

TailEstimate estimate_tail(const ModelSpec& spec, const Grid& grid, double epsilon, double c,
                           std::size_t n_paths, std::uint64_t seed,
                           const MonteCarloOptions& opts) {
  if (n_paths < 1000) throw dimension_error("estimate_tail: need at least 1000 paths");
  const KernelWeights weights = build_weights(spec.kernel, grid);
  SimulateOptions sopts;
  sopts.n_threads = opts.n_threads;
  const PathBatch batch = simulate_batch(spec, weights, epsilon, n_paths, seed, sopts);

  TailEstimate est;
  est.epsilon = epsilon;
  est.threshold = c;
  est.n_paths = n_paths;
  for (double x : batch.terminal_logprice)
    if (x >= c) ++est.hits;
  est.p_hat = static_cast<double>(est.hits) / static_cast<double>(n_paths);
  est.wilson_ci = wilson_interval(est.hits, n_paths);

  const double neg_inf = -std::numeric_limits<double>::infinity();
  est.no_hits = est.hits == 0;
  est.eps_log_p = est.no_hits ? neg_inf : epsilon * std::log(est.p_hat);
  est.eps_log_ci.first =
      est.wilson_ci.first > 0.0 ? epsilon * std::log(est.wilson_ci.first) : neg_inf;
  est.eps_log_ci.second =
      est.wilson_ci.second > 0.0 ? epsilon * std::log(est.wilson_ci.second) : neg_inf;
  return est;
}

LadderStudy ldp_convergence_study(const ModelSpec& spec, const Grid& grid, double c,
                                  std::span<const double> eps_ladder, std::size_t n_paths,
                                  std::uint64_t seed, const MonteCarloOptions& opts) {
  for (std::size_t i = 1; i < eps_ladder.size(); ++i)
    if (!(eps_ladder[i] < eps_ladder[i - 1]))
      throw dimension_error("ldp_convergence_study: epsilon ladder must be decreasing");

  LadderStudy study;
  for (double eps : eps_ladder)
    study.rows.push_back(estimate_tail(spec, grid, eps, c, n_paths, seed, opts));

  std::vector<double> xs, ys;
  std::size_t healthy_rungs = 0;
  for (const auto& row : study.rows) {
    if (row.no_hits) continue;
    xs.push_back(row.epsilon);
    ys.push_back(row.eps_log_p);
    if (row.p_hat > 10.0 / static_cast<double>(n_paths)) ++healthy_rungs;
  }
  study.healthy = healthy_rungs >= 3;
  study.summary_valid = xs.size() >= 2;
  if (!study.summary_valid) return study;

  auto linear_fit = [&xs](const std::vector<double>& vals) {
    const double m = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += vals[i];
    }
    mx /= m;
    my /= m;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (vals[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    return std::pair<double, double>{my - slope * mx, slope};
  };

  study.raw_intercept = linear_fit(ys).first;

  if (xs.size() >= 4) {
    // basis {1, eps, eps log eps}: the subexponential prefactor enters
    // eps log p as an eps log eps term whose coefficient the data fixes
    double a[3][3] = {}, b[3] = {};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double phi[3] = {1.0, xs[i], xs[i] * std::log(xs[i])};
      for (int r = 0; r < 3; ++r) {
        b[r] += phi[r] * ys[i];
        for (int c = 0; c < 3; ++c) a[r][c] += phi[r] * phi[c];
      }
    }
    double sol[3] = {};
    for (int k = 0; k < 3; ++k) {
      int p = k;
      for (int r = k + 1; r < 3; ++r)
        if (std::abs(a[r][k]) > std::abs(a[p][k])) p = r;
      std::swap(a[k], a[p]);
      std::swap(b[k], b[p]);
      for (int r = k + 1; r < 3; ++r) {
        const double f = a[r][k] / a[k][k];
        for (int c = k; c < 3; ++c) a[r][c] -= f * a[k][c];
        b[r] -= f * b[k];
      }
    }
    for (int k = 2; k >= 0; --k) {
      double s = b[k];
      for (int c = k + 1; c < 3; ++c) s -= a[k][c] * sol[c];
      sol[k] = s / a[k][k];
    }
    study.intercept = sol[0];
    study.slope = sol[1];
    for (std::size_t i = 0; i < xs.size(); ++i)
      study.max_residual = std::max(
          study.max_residual,
          std::abs(ys[i] - (sol[0] + sol[1] * xs[i] + sol[2] * xs[i] * std::log(xs[i]))));
  } else {
    // too few rungs to fit the prefactor: pin its coefficient at the
    // Laplace value 1/2 and fit the remaining line
    std::vector<double> corr(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      corr[i] = ys[i] - 0.5 * xs[i] * std::log(xs[i]);
    auto [b0, b1] = linear_fit(corr);
    study.intercept = b0;
    study.slope = b1;
    for (std::size_t i = 0; i < xs.size(); ++i)
      study.max_residual =
          std::max(study.max_residual, std::abs(corr[i] - (b0 + b1 * xs[i])));
  }
  return study;
}

}  // namespace vldp
