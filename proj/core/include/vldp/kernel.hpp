#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vldp/grid.hpp"

namespace vldp {

// Volterra kernels K(t,s). All registered families are convolution kernels
// K(t,s) = k(t-s), zero for s > t, with sup_t int_0^T K(t,s)^2 ds finite.
struct KernelSpec {
  enum class Family { Fractional, ShiftedFractional, Exponential, Constant };

  Family family = Family::Fractional;
  double hurst = 0.5;   // H in (0,1), fractional / shifted-fractional
  double shift = 0.0;   // delta > 0, shifted-fractional
  double decay = 0.0;   // lambda >= 0, exponential
  double level = 1.0;   // constant

  bool operator==(const KernelSpec&) const = default;
};

std::string kernel_family_name(KernelSpec::Family f);

// Pointwise value. Zero for s > t. For the fractional family with H < 1/2
// the value at s == t is +infinity; quadrature never samples it (cell
// integrals use the closed-form antiderivative).
double kernel_eval(const KernelSpec& spec, double t, double s);

// Precomputed lower-triangular cell integrals
//   W(i,j) = int_{t_j}^{t_{j+1}} K(t_i, s) ds,  j < i,
// stored packed row-major (row i holds i entries). Row 0 is empty.
class KernelWeights {
 public:
  KernelWeights() = default;
  KernelWeights(Grid grid, std::vector<double> packed);

  const Grid& grid() const { return grid_; }
  std::size_t rows() const { return grid_.n_steps + 1; }

  double at(std::size_t i, std::size_t j) const;  // 0 for j >= i
  std::span<const double> row(std::size_t i) const;

  // (K h)(t_i) = sum_{j<i} W(i,j) h_j for a step function with left values
  // h_0..h_{n-1}. Output has n+1 entries, out[0] = 0.
  std::vector<double> apply(std::span<const double> step_values) const;

 private:
  Grid grid_;
  std::vector<double> packed_;
  std::vector<std::size_t> offset_;
};

// Cell integrals in closed form for (shifted-)fractional kernels, 16-point
// Gauss-Legendre per cell for the exponential family, exact for constant.
KernelWeights build_weights(const KernelSpec& spec, const Grid& grid);

// Convenience alias for apply on a weights object.
std::vector<double> apply_kernel(const KernelWeights& w, std::span<const double> step_values);

// Numerical estimate of the L^2 modulus of continuity
//   M(h) = sup_{|t1-t2|<=h} int_0^T |K(t1,s)-K(t2,s)|^2 ds,
// maximised over grid-point pairs, piecewise Gauss-Legendre in s with the
// integrand split at the kink/singularity points. Diagnostic only.
double modulus_estimate(const KernelSpec& spec, const Grid& grid, double h);

}  // namespace vldp
