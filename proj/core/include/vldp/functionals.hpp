#pragma once

#include <span>
#include <vector>

#include "vldp/dynamics.hpp"
#include "vldp/model.hpp"

namespace vldp {

// Left-endpoint time integrals of the variational building blocks:
//   energy        = int fdot^2
//   total_variance = int sigma(vhat)^2      (full integral over [0,T])
//   covariation   = int sigma(vhat) fdot
struct FunctionalValues {
  double energy = 0.0;
  double total_variance = 0.0;
  double covariation = 0.0;
};

FunctionalValues compute_efg(const ModelSpec& spec, const KernelWeights& weights,
                             const ControlPath& ctrl);

// Scalar rate objective for target x:
//   (x - rho G)^2 / (2 rho_bar^2 F) + E / 2.
// F is the full integral over [0,T]; with constant spot-vol this reduces to
// x^2 / (2 sigma0^2 T) after minimisation, the Gaussian rate.
double inner_objective(const ModelSpec& spec, const KernelWeights& weights,
                       const ControlPath& ctrl, double x);
double inner_objective_from(const ModelSpec& spec, const FunctionalValues& efg, double x);

// Path-space rate integrand for a piecewise-linear target g (n+1 values,
// g[0] = 0), evaluated as a left-endpoint sum:
//   1/2 int ((gdot - rho sigma(vhat) fdot) / (rho_bar sigma(vhat)))^2 + E/2.
double path_rate_integrand(const ModelSpec& spec, const KernelWeights& weights,
                           const ControlPath& ctrl, std::span<const double> g);

// Terminal functional  Phi(y, f) = rho_bar sqrt(F) y + rho G.
double phi_functional(const ModelSpec& spec, const KernelWeights& weights, double y,
                      const ControlPath& ctrl);

// Path functional  Phi(r, h, l)(t) = rho_bar int_0^t sigma(l) rdot
//                                  + rho     int_0^t sigma(l) hdot,
// left-endpoint discretised on the fine grid carrying r, h, l.
double phi_path_functional(const ModelSpec& spec, const Grid& grid,
                           std::span<const double> r, std::span<const double> h,
                           std::span<const double> l, double t);

// m-point discretisation of the path functional with the grid snap
// Xi(t) = (T/m) floor(m t / T): sums of sigma(l(t_k)) increments over the
// coarse cells plus a stub term on [Xi(t), t]. The fine grid must refine
// the m-grid.
double phi_m_functional(const ModelSpec& spec, const Grid& grid, std::size_t m,
                        std::span<const double> r, std::span<const double> h,
                        std::span<const double> l, double t);

}  // namespace vldp
