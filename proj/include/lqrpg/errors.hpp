#pragma once

#include <stdexcept>
#include <string>

namespace lqrpg {

struct UnstableError : std::runtime_error {
  explicit UnstableError(double rho)
      : std::runtime_error("closed loop is not stable, spectral radius = " +
                           std::to_string(rho)),
        spectral_radius(rho) {}
  double spectral_radius;
};

struct NoConvergenceError : std::runtime_error {
  explicit NoConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericOverflowError : std::runtime_error {
  explicit NumericOverflowError(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidArgumentError : std::invalid_argument {
  explicit InvalidArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace lqrpg
