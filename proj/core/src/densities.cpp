#include "epilab/densities.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "epilab/fft.hpp"
#include "epilab/integrate.hpp"

namespace epilab {

namespace {

constexpr double kPi = std::numbers::pi;

double gauss_pdf(double x, double s) {
  return std::exp(-x * x / (2.0 * s)) / std::sqrt(2.0 * kPi * s);
}

double gauss_log_pdf(double x, double s) {
  return -x * x / (2.0 * s) - 0.5 * std::log(2.0 * kPi * s);
}

double gauss_cdf(double x, double s) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0 * s));
}

double gauss_sf(double x, double s) {
  return 0.5 * std::erfc(x / std::sqrt(2.0 * s));
}

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

void require_finite(double x, const char* op) {
  if (!std::isfinite(x))
    throw std::domain_error(std::string(op) + ": non-finite evaluation point");
}

// Integral over [0, xi] of the quadratic through (v0, vm, v1) at 0, 1/2, 1,
// in cell-relative coordinates (multiply by the cell width outside).
double partial_quadratic(double v0, double vm, double v1, double xi) {
  const double xi2 = xi * xi;
  const double xi3 = xi2 * xi;
  const double i0 = (2.0 / 3.0) * xi3 - 1.5 * xi2 + xi;
  const double im = 2.0 * xi2 - (4.0 / 3.0) * xi3;
  const double i1 = (2.0 / 3.0) * xi3 - 0.5 * xi2;
  return v0 * i0 + vm * im + v1 * i1;
}

}  // namespace

namespace detail {

double CdfTable::cdf(double x) const {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  const std::size_t cells = mid_pdf.size();
  auto i = static_cast<std::size_t>((x - lo) / h);
  i = std::min(i, cells - 1);
  const double xi = std::clamp((x - (lo + static_cast<double>(i) * h)) / h, 0.0, 1.0);
  const double part =
      h * partial_quadratic(node_pdf[i], mid_pdf[i], node_pdf[i + 1], xi);
  return std::clamp(lower[i] + part, 0.0, 1.0);
}

double CdfTable::survival(double x) const {
  if (x <= lo) return 1.0;
  if (x >= hi) return 0.0;
  const std::size_t cells = mid_pdf.size();
  auto i = static_cast<std::size_t>((x - lo) / h);
  i = std::min(i, cells - 1);
  const double xi = std::clamp((x - (lo + static_cast<double>(i) * h)) / h, 0.0, 1.0);
  // integrate from the right edge of the cell to keep tiny tails accurate
  const double part =
      h * partial_quadratic(node_pdf[i + 1], mid_pdf[i], node_pdf[i], 1.0 - xi);
  return std::clamp(upper[i + 1] + part, 0.0, 1.0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// construction

Density1D Density1D::gaussian(double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw std::domain_error("gaussian: variance must be positive");
  return Density1D(GaussianForm{variance});
}

Density1D Density1D::mixture(std::vector<MixtureComponent> components) {
  if (components.size() < 2)
    throw std::domain_error("mixture: need at least two components");
  double wsum = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0) || !(c.weight < 1.0))
      throw std::domain_error("mixture: weights must lie in (0, 1)");
    if (!(c.variance > 0.0) || !std::isfinite(c.variance))
      throw std::domain_error("mixture: variances must be positive");
    wsum += c.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-10)
    throw std::domain_error("mixture: weights must sum to 1");
  for (auto& c : components) c.weight /= wsum;
  return Density1D(MixtureForm{std::move(components)});
}

Density1D Density1D::laplace(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::domain_error("laplace: scale must be positive");
  return Density1D(LaplaceForm{scale});
}

Density1D Density1D::quartic_gibbs(double a) {
  if (!(a >= 0.0) || !std::isfinite(a))
    throw std::domain_error("quartic_gibbs: coefficient must be nonnegative");

  const double radius = 13.0;  // Gaussian-envelope tail beyond is ~1e-37
  const std::size_t cells = std::size_t{1} << 16;
  auto table = std::make_shared<detail::CdfTable>();
  table->lo = -radius;
  table->hi = radius;
  table->h = 2.0 * radius / static_cast<double>(cells);
  table->node_pdf.resize(cells + 1);
  table->mid_pdf.resize(cells);

  const auto weight = [a](double x) {
    const double x2 = x * x;
    return std::exp(-0.5 * x2 - a * x2 * x2);
  };
  for (std::size_t i = 0; i <= cells; ++i)
    table->node_pdf[i] = weight(table->lo + static_cast<double>(i) * table->h);
  for (std::size_t i = 0; i < cells; ++i)
    table->mid_pdf[i] = weight(table->lo + (static_cast<double>(i) + 0.5) * table->h);

  std::vector<double> mass(cells);
  KahanSum total;
  KahanSum second;
  for (std::size_t i = 0; i < cells; ++i) {
    const double x0 = table->lo + static_cast<double>(i) * table->h;
    const double xm = x0 + 0.5 * table->h;
    const double x1 = x0 + table->h;
    mass[i] = table->h / 6.0 *
              (table->node_pdf[i] + 4.0 * table->mid_pdf[i] + table->node_pdf[i + 1]);
    second.add(table->h / 6.0 *
               (x0 * x0 * table->node_pdf[i] + 4.0 * xm * xm * table->mid_pdf[i] +
                x1 * x1 * table->node_pdf[i + 1]));
    total.add(mass[i]);
  }
  const double z = total.sum;

  table->lower.resize(cells + 1);
  table->upper.resize(cells + 1);
  KahanSum acc;
  table->lower[0] = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    acc.add(mass[i]);
    table->lower[i + 1] = acc.sum / z;
  }
  table->lower[cells] = 1.0;
  KahanSum acc_up;
  table->upper[cells] = 0.0;
  for (std::size_t i = cells; i-- > 0;) {
    acc_up.add(mass[i]);
    table->upper[i] = acc_up.sum / z;
  }
  table->upper[0] = 1.0;
  for (auto& v : table->node_pdf) v /= z;
  for (auto& v : table->mid_pdf) v /= z;

  return Density1D(QuarticGibbsForm{a, std::log(z), second.sum / z, std::move(table)});
}

Density1D Density1D::grid(std::vector<double> values, double lo, double hi) {
  const std::size_t n = values.size();
  if (n < 3 || n % 2 == 0)
    throw std::domain_error("grid: need an odd number of nodes >= 3");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::domain_error("grid: invalid support");
  const std::size_t cells = n - 1;
  const double h = (hi - lo) / static_cast<double>(cells);

  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, v);
  if (!(vmax > 0.0)) throw std::domain_error("grid: density has no mass");
  for (double& v : values) {
    if (!std::isfinite(v)) throw std::domain_error("grid: non-finite value");
    if (v < -1e-12 * vmax) throw std::domain_error("grid: negative density value");
    v = std::max(v, 0.0);
  }

  const double mass = simpson_nodes(values, h);
  if (!(mass > 0.0)) throw std::domain_error("grid: density has no mass");
  for (double& v : values) v /= mass;

  auto lower = std::make_shared<std::vector<double>>(n);
  auto upper = std::make_shared<std::vector<double>>(n);
  KahanSum acc;
  (*lower)[0] = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc.add(0.5 * h * (values[i] + values[i + 1]));
    (*lower)[i + 1] = acc.sum;
  }
  const double trap_total = acc.sum;
  if (!(trap_total > 0.0)) throw std::domain_error("grid: density has no mass");
  for (auto& v : *lower) v /= trap_total;
  (*lower)[n - 1] = 1.0;
  KahanSum acc_up;
  (*upper)[n - 1] = 0.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    acc_up.add(0.5 * h * (values[i] + values[i + 1]));
    (*upper)[i] = acc_up.sum / trap_total;
  }
  (*upper)[0] = 1.0;

  KahanSum first, second;
  {
    // Simpson moments over nodes
    std::vector<double> m1(n), m2(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = lo + static_cast<double>(i) * h;
      m1[i] = x * values[i];
      m2[i] = x * x * values[i];
    }
    first.add(simpson_nodes(m1, h));
    second.add(simpson_nodes(m2, h));
  }
  const double var = second.sum;
  if (std::abs(first.sum) > 1e-8 * std::max(1.0, std::sqrt(std::max(var, 0.0))))
    throw std::domain_error("grid: density is not centered");

  GridForm form;
  form.lo = lo;
  form.hi = hi;
  form.spacing = h;
  form.values = std::make_shared<const std::vector<double>>(std::move(values));
  form.lower = std::move(lower);
  form.upper = std::move(upper);
  form.variance = var;
  return Density1D(Form{std::move(form)});
}

// ---------------------------------------------------------------------------
// basic accessors

double Density1D::variance() const {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianForm>) {
          return f.variance;
        } else if constexpr (std::is_same_v<T, MixtureForm>) {
          double v = 0.0;
          for (const auto& c : f.components) v += c.weight * c.variance;
          return v;
        } else if constexpr (std::is_same_v<T, LaplaceForm>) {
          return 2.0 * f.scale * f.scale;
        } else if constexpr (std::is_same_v<T, QuarticGibbsForm>) {
          return f.variance;
        } else {
          return f.variance;
        }
      },
      form_);
}

double Density1D::std_dev() const { return std::sqrt(variance()); }

double Density1D::tail_scale() const {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianForm>) {
          return std::sqrt(f.variance);
        } else if constexpr (std::is_same_v<T, MixtureForm>) {
          double s = 0.0;
          for (const auto& c : f.components) s = std::max(s, c.variance);
          return std::sqrt(s);
        } else if constexpr (std::is_same_v<T, LaplaceForm>) {
          // exponential tails need ~3x more room than the 12-sigma default
          return 3.0 * f.scale;
        } else if constexpr (std::is_same_v<T, QuarticGibbsForm>) {
          return 1.0;
        } else {
          return std::max(std::abs(f.lo), f.hi) / 12.0;
        }
      },
      form_);
}

double Density1D::feature_scale() const {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianForm>) {
          return std::sqrt(f.variance);
        } else if constexpr (std::is_same_v<T, MixtureForm>) {
          double s = std::numeric_limits<double>::infinity();
          for (const auto& c : f.components) s = std::min(s, c.variance);
          return std::sqrt(s);
        } else if constexpr (std::is_same_v<T, LaplaceForm>) {
          return f.scale;
        } else if constexpr (std::is_same_v<T, QuarticGibbsForm>) {
          return std::sqrt(f.variance);
        } else {
          return 8.0 * f.spacing;
        }
      },
      form_);
}

double Density1D::support_radius(const QuadratureConfig& cfg) const {
  if (const auto* g = std::get_if<GridForm>(&form_))
    return std::max(std::abs(g->lo), g->hi);
  return cfg.support_radius_multiplier * tail_scale();
}

std::string Density1D::family_name() const {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianForm>) return "gaussian";
        else if constexpr (std::is_same_v<T, MixtureForm>) return "mixture";
        else if constexpr (std::is_same_v<T, LaplaceForm>) return "laplace";
        else if constexpr (std::is_same_v<T, QuarticGibbsForm>) return "quartic";
        else return "grid";
      },
      form_);
}

// ---------------------------------------------------------------------------
// pointwise evaluation

double pdf(const Density1D& d, double x) {
  require_finite(x, "pdf");
  return std::visit(
      [x](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianForm>) {
          return gauss_pdf(x, f.variance);
        } else if constexpr (std::is_same_v<T, MixtureForm>) {
          double v = 0.0;
          for (const auto& c : f.components) v += c.weight * gauss_pdf(x, c.variance);
          return v;
        } else if constexpr (std::is_same_v<T, LaplaceForm>) {
          return std::exp(-std::abs(x) / f.scale) / (2.0 * f.scale);
        } else if constexpr (std::is_same_v<T, QuarticGibbsForm>) {
          const double x2 = x * x;
          return std::exp(-0.5 * x2 - f.a * x2 * x2 - f.log_normalizer);
        } else {
          if (x <= f.lo || x >= f.hi) return 0.0;
          const auto& v = *f.values;
          auto i = static_cast<std::size_t>((x - f.lo) / f.spacing);
          i = std::min(i, v.size() - 2);
          const double xi = (x - (f.lo + static_cast<double>(i) * f.spacing)) / f.spacing;
          return v[i] + (v[i + 1] - v[i]) * std::clamp(xi, 0.0, 1.0);
        }
      },
      d.form());
}

double log_pdf(const Density1D& d, double x) {
  require_finite(x, "log_pdf");
  return std::visit(
      [x, &d](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianForm>) {
          return gauss_log_pdf(x, f.variance);
        } else if constexpr (std::is_same_v<T, MixtureForm>) {
          double lmax = -std::numeric_limits<double>::infinity();
          for (const auto& c : f.components)
            lmax = std::max(lmax, std::log(c.weight) + gauss_log_pdf(x, c.variance));
          double acc = 0.0;
          for (const auto& c : f.components)
            acc += std::exp(std::log(c.weight) + gauss_log_pdf(x, c.variance) - lmax);
          return lmax + std::log(acc);
        } else if constexpr (std::is_same_v<T, LaplaceForm>) {
          return -std::abs(x) / f.scale - std::log(2.0 * f.scale);
        } else if constexpr (std::is_same_v<T, QuarticGibbsForm>) {
          const double x2 = x * x;
          return -0.5 * x2 - f.a * x2 * x2 - f.log_normalizer;
        } else {
          const double v = pdf(d, x);
          return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
        }
      },
      d.form());
}

double cdf(const Density1D& d, double x) {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  return std::visit(
      [x](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianForm>) {
          return gauss_cdf(x, f.variance);
        } else if constexpr (std::is_same_v<T, MixtureForm>) {
          double v = 0.0;
          for (const auto& c : f.components) v += c.weight * gauss_cdf(x, c.variance);
          return v;
        } else if constexpr (std::is_same_v<T, LaplaceForm>) {
          if (x < 0.0) return 0.5 * std::exp(x / f.scale);
          return 1.0 - 0.5 * std::exp(-x / f.scale);
        } else if constexpr (std::is_same_v<T, QuarticGibbsForm>) {
          return f.table->cdf(x);
        } else {
          if (x <= f.lo) return 0.0;
          if (x >= f.hi) return 1.0;
          const auto& v = *f.values;
          auto i = static_cast<std::size_t>((x - f.lo) / f.spacing);
          i = std::min(i, v.size() - 2);
          const double xi =
              std::clamp((x - (f.lo + static_cast<double>(i) * f.spacing)) / f.spacing,
                         0.0, 1.0);
          const double dv = v[i + 1] - v[i];
          const double part = f.spacing * (v[i] * xi + 0.5 * dv * xi * xi);
          // scale cell-local mass onto the normalized cumulative table
          const double trap_cell = 0.5 * f.spacing * (v[i] + v[i + 1]);
          const double next = (*f.lower)[i + 1];
          const double cur = (*f.lower)[i];
          const double scale = trap_cell > 0.0 ? (next - cur) / trap_cell : 0.0;
          return std::clamp(cur + part * scale, 0.0, 1.0);
        }
      },
      d.form());
}

double cdf_upper(const Density1D& d, double x) {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x == std::numeric_limits<double>::infinity()) return 0.0;
  if (x == -std::numeric_limits<double>::infinity()) return 1.0;
  return std::visit(
      [x](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianForm>) {
          return gauss_sf(x, f.variance);
        } else if constexpr (std::is_same_v<T, MixtureForm>) {
          double v = 0.0;
          for (const auto& c : f.components) v += c.weight * gauss_sf(x, c.variance);
          return v;
        } else if constexpr (std::is_same_v<T, LaplaceForm>) {
          if (x >= 0.0) return 0.5 * std::exp(-x / f.scale);
          return 1.0 - 0.5 * std::exp(x / f.scale);
        } else if constexpr (std::is_same_v<T, QuarticGibbsForm>) {
          return f.table->survival(x);
        } else {
          if (x <= f.lo) return 1.0;
          if (x >= f.hi) return 0.0;
          const auto& v = *f.values;
          auto i = static_cast<std::size_t>((x - f.lo) / f.spacing);
          i = std::min(i, v.size() - 2);
          const double xi =
              std::clamp((x - (f.lo + static_cast<double>(i) * f.spacing)) / f.spacing,
                         0.0, 1.0);
          const double dv = v[i + 1] - v[i];
          // remaining mass inside the cell, integrated from the right
          const double part =
              f.spacing * (v[i] * (1.0 - xi) + 0.5 * dv * (1.0 - xi * xi));
          const double trap_cell = 0.5 * f.spacing * (v[i] + v[i + 1]);
          const double cur = (*f.upper)[i];
          const double next = (*f.upper)[i + 1];
          const double scale = trap_cell > 0.0 ? (cur - next) / trap_cell : 0.0;
          return std::clamp(next + part * scale, 0.0, 1.0);
        }
      },
      d.form());
}

namespace {

std::pair<double, double> quantile_bracket(const Density1D& d) {
  if (const auto* g = std::get_if<GridForm>(&d.form()))
    return {g->lo, g->hi};
  const double r = std::max(1.0, 16.0 * d.tail_scale());
  return {-r, r};
}

}  // namespace

double quantile(const Density1D& d, double u, double tol) {
  if (!(u > 0.0) || !(u < 1.0))
    throw std::domain_error("quantile: u must lie in (0, 1)");
  auto [lo, hi] = quantile_bracket(d);
  if (!d.is_grid()) {
    for (int k = 0; k < 64 && cdf(d, lo) > u; ++k) lo *= 2.0;
    for (int k = 0; k < 64 && cdf(d, hi) < u; ++k) hi *= 2.0;
  }
  return bisect_root([&](double x) { return cdf(d, x) - u; }, lo, hi, tol);
}

double quantile_upper(const Density1D& d, double v, double tol) {
  if (!(v > 0.0) || !(v < 1.0))
    throw std::domain_error("quantile_upper: v must lie in (0, 1)");
  auto [lo, hi] = quantile_bracket(d);
  if (!d.is_grid()) {
    for (int k = 0; k < 64 && cdf_upper(d, lo) < v; ++k) lo *= 2.0;
    for (int k = 0; k < 64 && cdf_upper(d, hi) > v; ++k) hi *= 2.0;
  }
  return bisect_root([&](double x) { return cdf_upper(d, x) - v; }, lo, hi, tol);
}

double log_pdf_second_derivative(const Density1D& d, double x) {
  require_finite(x, "log_pdf_second_derivative");
  return std::visit(
      [x](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianForm>) {
          return -1.0 / f.variance;
        } else if constexpr (std::is_same_v<T, MixtureForm>) {
          // normalized component responsibilities keep the ratios stable in tails
          double lmax = -std::numeric_limits<double>::infinity();
          for (const auto& c : f.components)
            lmax = std::max(lmax, std::log(c.weight) + gauss_log_pdf(x, c.variance));
          double p = 0.0, d1 = 0.0, d2 = 0.0;
          for (const auto& c : f.components) {
            const double w = std::exp(std::log(c.weight) +
                                      gauss_log_pdf(x, c.variance) - lmax);
            const double s = c.variance;
            p += w;
            d1 += w * (-x / s);
            d2 += w * (x * x / (s * s) - 1.0 / s);
          }
          const double r1 = d1 / p;  // f'/f
          const double r2 = d2 / p;  // f''/f
          return r2 - r1 * r1;
        } else if constexpr (std::is_same_v<T, LaplaceForm>) {
          if (x == 0.0)
            throw NonSmoothPoint("log_pdf_second_derivative: Laplace is not smooth at 0");
          return 0.0;
        } else if constexpr (std::is_same_v<T, QuarticGibbsForm>) {
          return -(1.0 + 12.0 * f.a * x * x);
        } else {
          throw UnsupportedOperation(
              "log_pdf_second_derivative: unavailable for grid densities");
        }
      },
      d.form());
}

double absolute_moment(const Density1D& d, double p) {
  if (!(p > 0.0) || !std::isfinite(p))
    throw std::domain_error("absolute_moment: p must be positive");
  if (const auto* g = std::get_if<GaussianForm>(&d.form())) {
    const double s = g->variance;
    return std::exp(0.5 * p * std::log(2.0 * s) + std::lgamma(0.5 * (p + 1.0))) /
           std::sqrt(kPi);
  }
  // substitute x = u^2 to tame the |x|^p kink at the origin
  const double radius = d.support_radius(QuadratureConfig{});
  const auto g = [&](double u) {
    const double x = u * u;
    return std::pow(u, 2.0 * p + 1.0) * (pdf(d, x) + pdf(d, -x));
  };
  const double scale = std::max(1.0, std::pow(std::max(d.variance(), 1e-12), 0.5 * p));
  return 2.0 * integrate_adaptive(g, 0.0, std::sqrt(radius), 1e-10 * scale);
}

Density1D mixture_counterexample(double eps) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::domain_error("mixture_counterexample: eps must lie in (0, 1)");
  return Density1D::mixture({{eps, 1.0 / (2.0 * eps)},
                             {1.0 - eps, 1.0 / (2.0 * (1.0 - eps))}});
}

// ---------------------------------------------------------------------------
// gridding and convolution

namespace detail {

Density1D convolve_to_grid(const std::function<double(double)>& f1,
                           const std::function<double(double)>& f2,
                           double radius, std::size_t cells) {
  const std::size_t n = cells + 1;
  const double h = 2.0 * radius / static_cast<double>(cells);
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -radius + static_cast<double>(i) * h;
    a[i] = f1(x);
    b[i] = f2(x);
  }
  const std::vector<double> conv = convolve_linear(a, b, h);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = conv[cells / 2 + i];
  return Density1D::grid(std::move(out), -radius, radius);
}

}  // namespace detail

namespace {

void check_resolution(double radius, std::size_t cells, double min_feature,
                      const char* op) {
  const double h = 2.0 * radius / static_cast<double>(cells);
  if (h > min_feature / 4.0) {
    std::size_t needed = 1;
    while (static_cast<double>(needed) < 8.0 * radius / min_feature) needed <<= 1;
    std::ostringstream msg;
    msg << op << ": grid of " << cells << " cells cannot resolve support radius "
        << radius << " (finest feature " << min_feature << "); increase grid_points to "
        << needed << " or more";
    throw ConfigError(msg.str());
  }
}

}  // namespace

Density1D gaussian_smooth(const Density1D& d, double s, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(s > 0.0) || !std::isfinite(s))
    throw std::domain_error("gaussian_smooth: smoothing variance must be positive");
  const double rd = d.support_radius(cfg);
  const double m = cfg.support_radius_multiplier;
  const double radius = std::sqrt(rd * rd + m * m * s);
  check_resolution(radius, cfg.grid_points,
                   std::min(d.feature_scale(), std::sqrt(s)), "gaussian_smooth");
  return detail::convolve_to_grid([&](double x) { return pdf(d, x); },
                                  [&](double x) { return gauss_pdf(x, s); }, radius,
                                  cfg.grid_points);
}

Density1D to_grid(const Density1D& d, const QuadratureConfig& cfg) {
  cfg.validate();
  if (d.is_grid()) return d;
  const double radius = d.support_radius(cfg);
  check_resolution(radius, cfg.grid_points, d.feature_scale(), "to_grid");
  const std::size_t n = cfg.grid_points + 1;
  const double h = 2.0 * radius / static_cast<double>(cfg.grid_points);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i)
    values[i] = pdf(d, -radius + static_cast<double>(i) * h);
  return Density1D::grid(std::move(values), -radius, radius);
}

Density1D scale_density(const Density1D& d, double c, const QuadratureConfig& cfg) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::domain_error("scale_density: factor must be positive");
  return std::visit(
      [&](const auto& f) -> Density1D {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianForm>) {
          return Density1D::gaussian(c * c * f.variance);
        } else if constexpr (std::is_same_v<T, MixtureForm>) {
          auto comps = f.components;
          for (auto& comp : comps) comp.variance *= c * c;
          return Density1D::mixture(std::move(comps));
        } else if constexpr (std::is_same_v<T, LaplaceForm>) {
          return Density1D::laplace(c * f.scale);
        } else if constexpr (std::is_same_v<T, QuarticGibbsForm>) {
          // c X is no longer of the exp(-x^2/2 - a x^4) form; fall back to a grid
          cfg.validate();
          const double radius = c * d.support_radius(cfg);
          const std::size_t n = cfg.grid_points + 1;
          const double h = 2.0 * radius / static_cast<double>(cfg.grid_points);
          std::vector<double> values(n);
          for (std::size_t i = 0; i < n; ++i) {
            const double x = -radius + static_cast<double>(i) * h;
            values[i] = pdf(d, x / c) / c;
          }
          return Density1D::grid(std::move(values), -radius, radius);
        } else {
          std::vector<double> values(*f.values);
          for (auto& v : values) v /= c;
          return Density1D::grid(std::move(values), c * f.lo, c * f.hi);
        }
      },
      d.form());
}

// ---------------------------------------------------------------------------
// CSV serialization

namespace detail {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

void write_grid_csv(const Density1D& d, std::ostream& out) {
  const auto* g = std::get_if<GridForm>(&d.form());
  if (g == nullptr)
    throw UnsupportedOperation("write_grid_csv: only grid densities serialize; call to_grid first");
  const auto& v = *g->values;
  out << "# epi-lab grid v1, lo=" << detail::format_double(g->lo)
      << ", hi=" << detail::format_double(g->hi) << ", n=" << v.size() << "\n";
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = g->lo + static_cast<double>(i) * g->spacing;
    out << detail::format_double(x) << "," << detail::format_double(v[i]) << "\n";
  }
}

Density1D read_grid_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header))
    throw std::domain_error("read_grid_csv: empty input");
  const std::string magic = "# epi-lab grid v1,";
  if (header.rfind(magic, 0) != 0)
    throw std::domain_error("read_grid_csv: missing 'epi-lab grid v1' header");

  auto field = [&](const std::string& key) -> std::string {
    const auto pos = header.find(key + "=");
    if (pos == std::string::npos)
      throw std::domain_error("read_grid_csv: header missing " + key);
    auto end = header.find(',', pos);
    if (end == std::string::npos) end = header.size();
    return header.substr(pos + key.size() + 1, end - pos - key.size() - 1);
  };
  const double lo = std::stod(field("lo"));
  const double hi = std::stod(field("hi"));
  const auto n = static_cast<std::size_t>(std::stoul(field("n")));

  std::vector<double> values;
  values.reserve(n);
  std::string line;
  while (values.size() < n && std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::domain_error("read_grid_csv: malformed row '" + line + "'");
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  if (values.size() != n)
    throw std::domain_error("read_grid_csv: expected " + std::to_string(n) + " rows");
  return Density1D::grid(std::move(values), lo, hi);
}

}  // namespace epilab
