#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "epilab/config.hpp"

namespace epilab {

struct MixtureComponent {
  double weight;
  double variance;
};

namespace detail {

// Prefix/suffix cumulative table for densities without a closed-form cdf.
// Cell masses come from per-cell Simpson with midpoint samples; the suffix
// accumulation keeps the upper tail accurate where 1 - cdf(x) underflows.
struct CdfTable {
  double lo = 0.0;
  double hi = 0.0;
  double h = 0.0;
  std::vector<double> node_pdf;
  std::vector<double> mid_pdf;
  std::vector<double> lower;  // cdf at nodes, lower.front()=0, lower.back()=1
  std::vector<double> upper;  // survival at nodes, upper.front()=1, upper.back()=0

  double cdf(double x) const;
  double survival(double x) const;
};

}  // namespace detail

struct GaussianForm {
  double variance;
};

struct MixtureForm {
  std::vector<MixtureComponent> components;
};

struct LaplaceForm {
  double scale;
};

struct QuarticGibbsForm {
  double a;
  double log_normalizer;
  double variance;
  std::shared_ptr<const detail::CdfTable> table;
};

struct GridForm {
  double lo = 0.0;
  double hi = 0.0;
  double spacing = 0.0;
  std::shared_ptr<const std::vector<double>> values;  // pdf at nodes
  std::shared_ptr<const std::vector<double>> lower;   // cdf at nodes
  std::shared_ptr<const std::vector<double>> upper;   // survival at nodes
  double variance = 0.0;
};

// A centered probability density on the line. Immutable after construction;
// cheap to copy (grid payloads are shared).
class Density1D {
 public:
  using Form =
      std::variant<GaussianForm, MixtureForm, LaplaceForm, QuarticGibbsForm, GridForm>;

  static Density1D gaussian(double variance);
  static Density1D mixture(std::vector<MixtureComponent> components);
  static Density1D laplace(double scale);
  static Density1D quartic_gibbs(double a);
  /// Uniform pdf samples on [lo, hi]; values are renormalized to unit mass.
  static Density1D grid(std::vector<double> values, double lo, double hi);

  const Form& form() const { return form_; }
  bool is_grid() const { return std::holds_alternative<GridForm>(form_); }

  double variance() const;
  double std_dev() const;
  /// Scale such that multiplier * tail_scale truncates negligible mass.
  double tail_scale() const;
  /// Width of the narrowest feature a sampling grid must resolve.
  double feature_scale() const;
  /// Half-width of the sampling support under cfg.
  double support_radius(const QuadratureConfig& cfg) const;

  std::string family_name() const;

 private:
  explicit Density1D(Form form) : form_(std::move(form)) {}
  Form form_;
};

double pdf(const Density1D& d, double x);
double log_pdf(const Density1D& d, double x);
double cdf(const Density1D& d, double x);
/// Survival function 1 - cdf, accurate in the upper tail.
double cdf_upper(const Density1D& d, double x);
double quantile(const Density1D& d, double u, double tol = 1e-12);
/// x such that cdf_upper(x) = v; accurate for tiny v.
double quantile_upper(const Density1D& d, double v, double tol = 1e-12);

/// Exact (log f)'' for analytic families; Grid is unsupported, Laplace at 0
/// is a non-smooth point.
double log_pdf_second_derivative(const Density1D& d, double x);

/// E|X|^p; closed form for Gaussian, adaptive quadrature otherwise.
double absolute_moment(const Density1D& d, double p);

/// Two-Gaussian mixture with unit variance and component variances
/// 1/(2 eps), 1/(2(1-eps)); collapses to the standard Gaussian at eps = 1/2.
Density1D mixture_counterexample(double eps);

/// Density of X + sqrt(s) Z via FFT convolution on the configured grid.
Density1D gaussian_smooth(const Density1D& d, double s,
                          const QuadratureConfig& cfg = {});

/// Sample any density onto a uniform grid (identity for Grid inputs).
Density1D to_grid(const Density1D& d, const QuadratureConfig& cfg = {});

/// Density of c * X. Closed form per family; QuarticGibbs falls back to Grid.
Density1D scale_density(const Density1D& d, double c,
                        const QuadratureConfig& cfg = {});

/// Two-column CSV with header "# epi-lab grid v1, lo=<lo>, hi=<hi>, n=<n>".
void write_grid_csv(const Density1D& d, std::ostream& out);
Density1D read_grid_csv(std::istream& in);

namespace detail {

/// FFT linear convolution of two sampled densities, restricted to [-radius, radius].
Density1D convolve_to_grid(const std::function<double(double)>& f1,
                           const std::function<double(double)>& f2,
                           double radius, std::size_t cells);

/// Locale-independent shortest round-trip formatting.
std::string format_double(double v);

}  // namespace detail

}  // namespace epilab
