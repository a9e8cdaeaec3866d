#include "epilab/integrate.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace epilab {

double simpson_nodes(const std::vector<double>& values, double spacing) {
  const std::size_t n = values.size();
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("simpson_nodes: need an odd number of nodes >= 3");
  double sum = values.front() + values.back();
  for (std::size_t i = 1; i + 1 < n; ++i) sum += values[i] * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * spacing / 3.0;
}

double integrate_simpson(const std::function<double(double)>& f, double lo,
                         double hi, std::size_t cells) {
  if (cells == 0) throw std::invalid_argument("integrate_simpson: zero cells");
  const double h = (hi - lo) / static_cast<double>(cells);
  double sum = 0.0;
  double left = f(lo);
  for (std::size_t i = 0; i < cells; ++i) {
    const double a = lo + static_cast<double>(i) * h;
    const double mid = f(a + 0.5 * h);
    const double right = (i + 1 == cells) ? f(hi) : f(a + h);
    sum += (left + 4.0 * mid + right);
    left = right;
  }
  return sum * h / 6.0;
}

namespace {

double adaptive_step(const std::function<double(double)>& f, double a, double b,
                     double fa, double fm, double fb, double whole, double tol,
                     int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double lo,
                          double hi, double tol, int max_depth) {
  const double fa = f(lo);
  const double fb = f(hi);
  const double fm = f(0.5 * (lo + hi));
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_step(f, lo, hi, fa, fm, fb, whole, tol, max_depth);
}

namespace {

// Legendre P_n(x) and its derivative by the three-term recurrence.
std::pair<double, double> legendre_pair(std::size_t n, double x) {
  double p0 = 1.0, p1 = x;
  for (std::size_t k = 2; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
    p0 = p1;
    p1 = p2;
  }
  const double dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

QuadratureRule make_gauss_legendre(std::size_t n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre_pair(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const auto [p, dp] = legendre_pair(n, x);
    (void)p;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

// Hermite nodes/weights for weight e^{-x^2}, Newton iteration on the
// normalized recurrence (Numerical Recipes style initial guesses).
QuadratureRule make_gauss_hermite(std::size_t n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pim4 = 0.7511255444649424828587030047762;  // pi^{-1/4}
  const std::size_t m = (n + 1) / 2;
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dn = static_cast<double>(n);
    if (i == 0) {
      z = std::sqrt(2.0 * dn + 1.0) - 1.85575 * std::pow(2.0 * dn + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(dn, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[n - 1];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[n - 2];
    } else {
      z = 2.0 * z - rule.nodes[n - i + 1];
    }
    double pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double dj = static_cast<double>(j);
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (dj + 1.0)) * p2 - std::sqrt(dj / (dj + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * dn) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    rule.nodes[n - 1 - i] = z;
    rule.nodes[i] = -z;
    rule.weights[n - 1 - i] = 2.0 / (pp * pp);
    rule.weights[i] = rule.weights[n - 1 - i];
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

std::mutex g_rule_mutex;

}  // namespace

const QuadratureRule& gauss_legendre(std::size_t n) {
  static std::map<std::size_t, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

const QuadratureRule& gauss_hermite(std::size_t n) {
  static std::map<std::size_t, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_hermite(n)).first;
  return it->second;
}

double integrate_unit_dyadic(const std::function<double(double)>& f, int levels,
                             std::size_t points_per_panel) {
  const QuadratureRule& rule = gauss_legendre(points_per_panel);
  double total = 0.0;
  // panels [2^-(k+1), 2^-k] on the left, mirrored on the right, plus the bulk
  // [1/4, 3/4]; the untouched stubs near 0 and 1 have width 2^-(levels+1).
  const auto panel = [&](double a, double b) {
    const double c = 0.5 * (a + b);
    const double r = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      s += rule.weights[i] * f(c + r * rule.nodes[i]);
    return s * r;
  };
  total += panel(0.25, 0.75);
  double hi = 0.25;
  for (int k = 2; k <= levels; ++k) {
    const double lo = hi * 0.5;
    total += panel(lo, hi);
    total += panel(1.0 - hi, 1.0 - lo);
    hi = lo;
  }
  return total;
}

std::pair<double, double> golden_section_min(const std::function<double(double)>& f,
                                             double lo, double hi, double x_tol) {
  constexpr double kInvPhi = 0.6180339887498948482045868343656;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > x_tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double x_tol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw std::invalid_argument("bisect_root: endpoints do not bracket a root");
  while (hi - lo > x_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval at double resolution
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace epilab
