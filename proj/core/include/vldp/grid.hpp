#pragma once

#include <cstddef>

#include "vldp/errors.hpp"

namespace vldp {

// Uniform time grid t_k = k T / n, k = 0..n.
struct Grid {
  std::size_t n_steps = 0;
  double horizon = 0.0;

  Grid() = default;
  Grid(std::size_t n, double T) : n_steps(n), horizon(T) {
    if (n == 0) throw dimension_error("grid needs at least one step");
    if (!(T > 0.0)) throw dimension_error("grid horizon must be positive");
  }

  double dt() const { return horizon / static_cast<double>(n_steps); }
  double t(std::size_t k) const { return horizon * static_cast<double>(k) / static_cast<double>(n_steps); }

  bool operator==(const Grid&) const = default;
};

}  // namespace vldp
