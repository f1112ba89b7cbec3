#pragma once

#include <stdexcept>
#include <string>

namespace vldp {

// Bad config file, unknown family/key, parameter out of range.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// State blew up during an ODE solve or path simulation.
class divergence_error : public std::runtime_error {
 public:
  divergence_error(const std::string& msg, std::size_t index)
      : std::runtime_error(msg + " (first bad index " + std::to_string(index) + ")"),
        index(index) {}
  std::size_t index;
};

// Dispersion coefficient vanished where a control had to be recovered.
class singular_control_error : public std::runtime_error {
 public:
  singular_control_error(const std::string& msg, std::size_t index)
      : std::runtime_error(msg + " (index " + std::to_string(index) + ")"),
        index(index) {}
  std::size_t index;
};

// Vector/grid size mismatch between cooperating objects.
class dimension_error : public std::invalid_argument {
 public:
  explicit dimension_error(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace vldp
