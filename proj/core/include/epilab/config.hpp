#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epilab {

/// Thrown when a grid cannot resolve the support or resolution a computation needs.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a bound's regularity hypothesis fails its active check.
struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a transport map hits a zero target density.
struct SingularMapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown for operations a density family does not support.
struct UnsupportedOperation : std::logic_error {
  using std::logic_error::logic_error;
};

/// Thrown at the non-differentiable point of a piecewise-smooth density.
struct NonSmoothPoint : std::domain_error {
  using std::domain_error::domain_error;
};

// Controls every quadrature, FFT convolution and bisection in the library.
// grid_points counts uniform cells; grids carry grid_points + 1 nodes so the
// origin is always a node and composite Simpson applies directly.
struct QuadratureConfig {
  double support_radius_multiplier = 12.0;
  std::size_t grid_points = std::size_t{1} << 16;
  double cdf_bisection_tol = 1e-12;
  double integral_tol = 1e-9;

  void validate() const {
    if (!(support_radius_multiplier > 0))
      throw std::invalid_argument("QuadratureConfig: support_radius_multiplier must be positive");
    if (grid_points < (std::size_t{1} << 10) || (grid_points & (grid_points - 1)) != 0)
      throw std::invalid_argument("QuadratureConfig: grid_points must be a power of two >= 2^10");
    if (!(cdf_bisection_tol > 0) || !(integral_tol > 0))
      throw std::invalid_argument("QuadratureConfig: tolerances must be positive");
  }
};

}  // namespace epilab
