#include <doctest.h>

#include <cmath>
#include <vector>

#include "vldp/montecarlo.hpp"

using namespace vldp;

namespace {

ModelSpec constant_sigma_spec(double sigma0, double rho = 0.0, double T = 1.0) {
  ModelSpec s;
  s.kernel = {KernelSpec::Family::Constant, 0, 0, 0, 1.0};
  s.u_fn = FunctionSpec::identity();
  s.sigma_fn = FunctionSpec::constant(sigma0);
  s.drift_fn = FunctionSpec::zero();
  s.disp_fn = FunctionSpec::constant(1.0);
  s.v0 = 0.04;
  s.rho = rho;
  s.horizon = T;
  return s;
}

double normal_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// exact P(X_T^eps >= c) for constant sigma
double exact_tail(double sigma0, double T, double eps, double c) {
  const double mean = -0.5 * eps * sigma0 * sigma0 * T;
  const double sd = sigma0 * std::sqrt(eps * T);
  return normal_tail((c - mean) / sd);
}

}  // namespace

TEST_CASE("wilson interval brackets the point estimate") {
  const auto [lo, hi] = wilson_interval(30, 1000);
  CHECK(lo > 0.0);
  CHECK(lo < 0.03);
  CHECK(hi > 0.03);
  CHECK(hi < 0.06);
  const auto [lo0, hi0] = wilson_interval(0, 1000);
  CHECK(lo0 == 0.0);
  CHECK(hi0 > 0.0);
}

TEST_CASE("estimate_tail: degenerate thresholds") {
  const ModelSpec spec = constant_sigma_spec(0.2);
  const Grid grid(16, 1.0);
  const auto all = estimate_tail(spec, grid, 0.2, -100.0, 2000, 3);
  CHECK(all.p_hat == 1.0);
  CHECK(all.eps_log_p == 0.0);
  const auto none = estimate_tail(spec, grid, 0.2, 100.0, 2000, 3);
  CHECK(none.p_hat == 0.0);
  CHECK(none.no_hits);
  CHECK(std::isinf(none.eps_log_p));
}

TEST_CASE("estimate_tail: Gaussian oracle within the confidence interval") {
  const double sigma0 = 0.4;
  const ModelSpec spec = constant_sigma_spec(sigma0);
  const Grid grid(32, 1.0);
  for (double eps : {0.4, 0.1}) {
    const auto est = estimate_tail(spec, grid, eps, 0.3, 100000, 2024);
    const double exact = exact_tail(sigma0, 1.0, eps, 0.3);
    CHECK(est.wilson_ci.first <= exact);
    CHECK(exact <= est.wilson_ci.second);
  }
}

TEST_CASE("estimate_tail: determinism and monotonicity in the threshold") {
  const ModelSpec spec = constant_sigma_spec(0.3);
  const Grid grid(16, 1.0);
  const auto a = estimate_tail(spec, grid, 0.3, 0.1, 5000, 7);
  const auto b = estimate_tail(spec, grid, 0.3, 0.1, 5000, 7);
  CHECK(a.p_hat == b.p_hat);
  // same seed, higher threshold: the very same sample is reused
  double prev = 1.0;
  for (double c : {-0.5, 0.0, 0.1, 0.2, 0.5}) {
    const auto est = estimate_tail(spec, grid, 0.3, c, 5000, 7);
    CHECK(est.p_hat <= prev);
    prev = est.p_hat;
  }
}

TEST_CASE("estimate_tail: coverage over independent seeds") {
  // 95% intervals should contain the exact tail in at least 90 of 100 runs
  const double sigma0 = 0.4;
  const ModelSpec spec = constant_sigma_spec(sigma0);
  const Grid grid(16, 1.0);
  const double exact = exact_tail(sigma0, 1.0, 0.3, 0.25);
  int covered = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto est = estimate_tail(spec, grid, 0.3, 0.25, 10000, seed);
    if (est.wilson_ci.first <= exact && exact <= est.wilson_ci.second) ++covered;
  }
  CHECK(covered >= 90);
}

TEST_CASE("ldp study: ladder validation and degenerate summaries") {
  const ModelSpec spec = constant_sigma_spec(0.25);
  const Grid grid(16, 1.0);
  const std::vector<double> increasing = {0.1, 0.2};
  CHECK_THROWS_AS(
      ldp_convergence_study(spec, grid, 0.3, increasing, 2000, 1),
      dimension_error);
  const std::vector<double> single = {0.3};
  const auto study = ldp_convergence_study(spec, grid, 0.3, single, 2000, 1);
  CHECK(study.rows.size() == 1);
  CHECK_FALSE(study.summary_valid);  // fit needs at least two points
}

TEST_CASE("ldp study: Gaussian extrapolation lands near the exact rate") {
  const double sigma0 = 0.25, c = 0.3;
  const ModelSpec spec = constant_sigma_spec(sigma0);
  const Grid grid(32, 1.0);
  const std::vector<double> ladder = {0.24, 0.168, 0.12};
  const auto study = ldp_convergence_study(spec, grid, c, ladder, 400000, 99);
  REQUIRE(study.summary_valid);
  CHECK(study.healthy);
  const double exact_rate = c * c / (2.0 * sigma0 * sigma0);
  CHECK(std::abs(study.intercept + exact_rate) / exact_rate <= 0.10);
}

TEST_CASE("ldp study: flags rungs with no hits instead of failing") {
  const ModelSpec spec = constant_sigma_spec(0.2);
  const Grid grid(16, 1.0);
  const std::vector<double> ladder = {0.4, 0.2, 0.01};  // bottom rung unreachable
  const auto study = ldp_convergence_study(spec, grid, 1.5, ladder, 2000, 5);
  REQUIRE(study.rows.size() == 3);
  CHECK(study.rows[2].no_hits);
  CHECK_FALSE(study.healthy);
}
