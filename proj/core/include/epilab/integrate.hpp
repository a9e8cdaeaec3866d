#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace epilab {

/// Composite Simpson over values at n+1 uniformly spaced nodes (n even).
double simpson_nodes(const std::vector<double>& values, double spacing);

/// Composite Simpson of f over [lo, hi] with `cells` cells, sampling midpoints.
double integrate_simpson(const std::function<double(double)>& f, double lo,
                         double hi, std::size_t cells);

/// Adaptive Simpson to absolute tolerance tol.
double integrate_adaptive(const std::function<double(double)>& f, double lo,
                          double hi, double tol, int max_depth = 48);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1].
const QuadratureRule& gauss_legendre(std::size_t n);

/// Gauss-Hermite rule with weight e^{-x^2} (physicists' convention).
const QuadratureRule& gauss_hermite(std::size_t n);

// Integral over (0,1) of an integrand built from quantile functions: dyadic
// panels refine toward both endpoints, 16-point Gauss-Legendre per panel.
// Integrands may grow like powers of log(1/u) at the endpoints.
double integrate_unit_dyadic(const std::function<double(double)>& f,
                             int levels = 46, std::size_t points_per_panel = 16);

/// Golden-section minimization of a unimodal f on [lo, hi]; returns (x*, f(x*)).
std::pair<double, double> golden_section_min(const std::function<double(double)>& f,
                                             double lo, double hi, double x_tol);

/// Bisection for f(x) = 0 on a bracketing interval [lo, hi].
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double x_tol);

}  // namespace epilab
