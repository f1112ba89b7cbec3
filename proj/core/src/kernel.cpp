#include "vldp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vldp {

namespace {

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr int kGL = 16;
constexpr double kGLNode[kGL] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
constexpr double kGLWeight[kGL] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

template <typename F>
double gauss_legendre(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int q = 0; q < kGL; ++q) acc += kGLWeight[q] * f(mid + half * kGLNode[q]);
  return acc * half;
}

double frac_norm(double hurst) { return std::tgamma(hurst + 0.5); }

}  // namespace

std::string kernel_family_name(KernelSpec::Family f) {
  switch (f) {
    case KernelSpec::Family::Fractional: return "fractional";
    case KernelSpec::Family::ShiftedFractional: return "shifted-fractional";
    case KernelSpec::Family::Exponential: return "exponential";
    case KernelSpec::Family::Constant: return "constant";
  }
  return "?";
}

double kernel_eval(const KernelSpec& spec, double t, double s) {
  if (s > t) return 0.0;
  const double d = t - s;
  switch (spec.family) {
    case KernelSpec::Family::Fractional: {
      const double e = spec.hurst - 0.5;
      if (d == 0.0) {
        if (e < 0.0) return std::numeric_limits<double>::infinity();
        if (e == 0.0) return 1.0;  // d^0 / Gamma(1)
        return 0.0;
      }
      return std::pow(d, e) / frac_norm(spec.hurst);
    }
    case KernelSpec::Family::ShiftedFractional:
      return std::pow(d + spec.shift, spec.hurst - 0.5);
    case KernelSpec::Family::Exponential:
      return std::exp(-spec.decay * d);
    case KernelSpec::Family::Constant:
      return spec.level;
  }
  return 0.0;
}

KernelWeights::KernelWeights(Grid grid, std::vector<double> packed)
    : grid_(grid), packed_(std::move(packed)) {
  const std::size_t n1 = grid_.n_steps + 1;
  offset_.resize(n1 + 1, 0);
  for (std::size_t i = 0; i < n1; ++i) offset_[i + 1] = offset_[i] + i;
  if (packed_.size() != offset_[n1])
    throw dimension_error("kernel weights: packed size does not match grid");
}

double KernelWeights::at(std::size_t i, std::size_t j) const {
  if (i >= rows()) throw dimension_error("kernel weights: row out of range");
  if (j >= i) return 0.0;
  return packed_[offset_[i] + j];
}

std::span<const double> KernelWeights::row(std::size_t i) const {
  if (i >= rows()) throw dimension_error("kernel weights: row out of range");
  return {packed_.data() + offset_[i], i};
}

std::vector<double> KernelWeights::apply(std::span<const double> step_values) const {
  const std::size_t n = grid_.n_steps;
  if (step_values.size() != n)
    throw dimension_error("apply_kernel: step function must have one value per cell");
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double* w = packed_.data() + offset_[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < i; ++j) acc += w[j] * step_values[j];
    out[i] = acc;
  }
  return out;
}

KernelWeights build_weights(const KernelSpec& spec, const Grid& grid) {
  const std::size_t n = grid.n_steps;
  const double dt = grid.dt();
  std::vector<double> packed;
  packed.reserve(n * (n + 1) / 2);

  // All registered families are difference kernels, so the cell integral
  // depends only on the lag i - j; compute one column of lags and fan out.
  std::vector<double> lag(n + 1, 0.0);  // lag[l] = int over cell at distance l
  switch (spec.family) {
    case KernelSpec::Family::Fractional: {
      // Antiderivative of (t-s)^(H-1/2) in s is -(t-s)^(H+1/2)/(H+1/2).
      const double p = spec.hurst + 0.5;
      const double norm = p * frac_norm(spec.hurst);
      const double dtp = std::pow(dt, p);
      for (std::size_t l = 1; l <= n; ++l) {
        const double a = std::pow(static_cast<double>(l), p);
        const double b = std::pow(static_cast<double>(l - 1), p);
        lag[l] = dtp * (a - b) / norm;
      }
      break;
    }
    case KernelSpec::Family::ShiftedFractional: {
      const double p = spec.hurst + 0.5;
      for (std::size_t l = 1; l <= n; ++l) {
        const double hi = static_cast<double>(l) * dt + spec.shift;
        const double lo = static_cast<double>(l - 1) * dt + spec.shift;
        lag[l] = (std::pow(hi, p) - std::pow(lo, p)) / p;
      }
      break;
    }
    case KernelSpec::Family::Exponential: {
      for (std::size_t l = 1; l <= n; ++l) {
        const double ti = static_cast<double>(l) * dt;
        lag[l] = gauss_legendre(
            [&](double s) { return std::exp(-spec.decay * (ti - s)); }, 0.0, dt);
      }
      break;
    }
    case KernelSpec::Family::Constant: {
      for (std::size_t l = 1; l <= n; ++l) lag[l] = spec.level * dt;
      break;
    }
  }

  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j < i; ++j) packed.push_back(lag[i - j]);

  return KernelWeights(grid, std::move(packed));
}

std::vector<double> apply_kernel(const KernelWeights& w, std::span<const double> step_values) {
  return w.apply(step_values);
}

namespace {

// Integral of (K(t1,.) - K(t2,.))^2 over [0, t2]; the integrand vanishes
// beyond t2, has a kink at t1 and may be singular at s -> t1-, t2-.
// Geometrically graded Gauss-Legendre panels absorb the singular endpoints.
double l2_difference(const KernelSpec& spec, double t1, double t2) {
  auto integrand = [&](double s) {
    const double d = kernel_eval(spec, t1, s) - kernel_eval(spec, t2, s);
    return d * d;
  };
  auto graded = [&](double a, double b) {
    // panels accumulating toward b
    if (b <= a) return 0.0;
    double acc = 0.0;
    double left = a;
    const int levels = 24;
    for (int k = 1; k <= levels; ++k) {
      double right = (k == levels) ? b : b - (b - a) * std::pow(0.5, k);
      if (right > left) acc += gauss_legendre(integrand, left, right);
      left = right;
    }
    return acc;
  };
  return graded(0.0, t1) + graded(t1, t2);
}

}  // namespace

double modulus_estimate(const KernelSpec& spec, const Grid& grid, double h) {
  if (!(h > 0.0) || h > grid.horizon)
    throw dimension_error("modulus_estimate: need 0 < h <= T");
  if (spec.family == KernelSpec::Family::Constant) return 0.0;

  const std::size_t n = grid.n_steps;
  const double dt = grid.dt();
  const std::size_t sep_max = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::floor(h / dt + 1e-12)));
  if (sep_max == 0) return 0.0;

  // Separation set: the largest grid separation <= h plus a few smaller
  // ones; the sup over positions is scanned on a capped stride.
  std::vector<std::size_t> seps = {sep_max};
  if (sep_max > 1) seps.push_back(sep_max / 2);
  if (sep_max > 3) seps.push_back(sep_max / 4);

  double best = 0.0;
  for (std::size_t sep : seps) {
    if (sep == 0) continue;
    const std::size_t positions = n - sep + 1;
    const std::size_t stride = std::max<std::size_t>(1, positions / 32);
    for (std::size_t i = 0; i + sep <= n; i += stride) {
      best = std::max(best, l2_difference(spec, grid.t(i), grid.t(i + sep)));
    }
    // always include the right edge
    best = std::max(best, l2_difference(spec, grid.t(n - sep), grid.t(n)));
  }
  return best;
}

}  // namespace vldp
