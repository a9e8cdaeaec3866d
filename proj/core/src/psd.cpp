#include "epilab/psd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "epilab/rng.hpp"

namespace epilab {

SymMatrix::SymMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {
  if (n == 0) throw std::invalid_argument("SymMatrix: dimension must be positive");
}

SymMatrix SymMatrix::identity(std::size_t n) {
  SymMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1.0);
  return m;
}

SymMatrix SymMatrix::diagonal(const std::vector<double>& d) {
  SymMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.set(i, i, d[i]);
  return m;
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  SymMatrix m(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n)
      throw std::invalid_argument("SymMatrix: ragged rows");
    for (std::size_t j = 0; j < n; ++j)
      scale = std::max(scale, std::abs(rows[i][j]));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (std::abs(rows[i][j] - rows[j][i]) > 1e-12 * std::max(1.0, scale))
        throw std::domain_error("SymMatrix: input is not symmetric");
      m.set(i, j, 0.5 * (rows[i][j] + rows[j][i]));
    }
  return m;
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

double SymMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

SymMatrix SymMatrix::operator+(const SymMatrix& other) const {
  if (other.n_ != n_) throw std::invalid_argument("SymMatrix: dimension mismatch");
  SymMatrix out(n_);
  for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] + other.a_[i];
  return out;
}

SymMatrix SymMatrix::operator-(const SymMatrix& other) const {
  if (other.n_ != n_) throw std::invalid_argument("SymMatrix: dimension mismatch");
  SymMatrix out(n_);
  for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = a_[i] - other.a_[i];
  return out;
}

SymMatrix SymMatrix::scaled(double c) const {
  SymMatrix out(n_);
  for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] = c * a_[i];
  return out;
}

SpectralDecomposition spectral_decompose(const SymMatrix& m) {
  const std::size_t n = m.dim();
  std::vector<double> a(m.data());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double norm0 = std::max(m.frobenius_norm(), 1e-300);
  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a[p * n + q] * a[p * n + q];
    return std::sqrt(2.0 * s);
  };

  for (int sweep = 0; sweep < 100 && off_norm() > 1e-12 * norm0; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) <= 1e-300) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const double di = a[i * n + i];
    const double dj = a[j * n + j];
    return di < dj || (di == dj && i < j);
  });

  SpectralDecomposition out;
  out.dim = n;
  out.eigenvalues.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.eigenvalues[k] = a[src * n + src];
    // deterministic sign: largest-magnitude entry positive
    std::size_t imax = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(v[i * n + src]) > std::abs(v[imax * n + src])) imax = i;
    const double sign = v[imax * n + src] < 0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors[k * n + i] = sign * v[i * n + src];
  }
  return out;
}

double lambda_max(const SymMatrix& m) {
  return spectral_decompose(m).eigenvalues.back();
}

double lambda_min(const SymMatrix& m) {
  return spectral_decompose(m).eigenvalues.front();
}

SymMatrix sqrt_psd(const SymMatrix& m) {
  const auto dec = spectral_decompose(m);
  const std::size_t n = m.dim();
  const double scale = std::max(std::abs(dec.eigenvalues.back()), 1.0);
  SymMatrix out(n);
  std::vector<double> roots(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (dec.eigenvalues[k] < -1e-10 * scale)
      throw std::domain_error("sqrt_psd: matrix is not positive semidefinite");
    roots[k] = std::sqrt(std::max(dec.eigenvalues[k], 0.0));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        s += roots[k] * dec.vector_entry(i, k) * dec.vector_entry(j, k);
      out.set(i, j, s);
    }
  return out;
}

double log_det_pd(const SymMatrix& m) {
  const auto dec = spectral_decompose(m);
  double s = 0.0;
  for (double lam : dec.eigenvalues) {
    if (lam <= 0.0)
      throw std::domain_error("log_det_pd: matrix is not positive definite");
    s += std::log(lam);
  }
  return s;
}

double strong_convexity_modulus(const SymMatrix& a, const SymMatrix& b) {
  if (lambda_min(a) <= 0.0 || lambda_min(b) <= 0.0)
    throw std::domain_error("strong_convexity_modulus: inputs must be positive definite");
  const double lm = std::max(lambda_max(a), lambda_max(b));
  return 1.0 / (lm * lm);
}

LemmaGapReport logdet_strong_convexity_check(const SymMatrix& a,
                                             const SymMatrix& b, double t) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("logdet_strong_convexity_check: dimension mismatch");
  if (t < 0.0 || t > 1.0)
    throw std::domain_error("logdet_strong_convexity_check: t must lie in [0, 1]");
  const double modulus = strong_convexity_modulus(a, b);

  LemmaGapReport rep;
  rep.t = t;
  const SymMatrix blend = a.scaled(t) + b.scaled(1.0 - t);
  rep.lhs = log_det_pd(blend);
  rep.base = t * log_det_pd(a) + (1.0 - t) * log_det_pd(b);
  const SymMatrix diff = a - b;
  const double fro = diff.frobenius_norm();
  rep.remainder = t * (1.0 - t) * 0.5 * modulus * fro * fro;
  rep.margin = rep.lhs - rep.base - rep.remainder;
  return rep;
}

SymMatrix random_pd_matrix(std::size_t n, std::uint64_t seed, std::uint64_t counter) {
  SplitMix64 rng = SplitMix64::for_trial(seed, counter);
  std::vector<double> g(n * n);
  for (double& x : g) x = rng.normal();
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += g[k * n + i] * g[k * n + j];
      out.set(i, j, s + (i == j ? 1e-3 : 0.0));
    }
  return out;
}

LemmaFuzzSummary lemma_fuzz_campaign(std::size_t trials, std::size_t dim_lo,
                                     std::size_t dim_hi, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("lemma_fuzz_campaign: trials must be >= 1");
  if (dim_lo < 1 || dim_hi < dim_lo)
    throw std::invalid_argument("lemma_fuzz_campaign: bad dimension range");

  LemmaFuzzSummary summary;
  summary.trials = trials;
  summary.dim_lo = dim_lo;
  summary.dim_hi = dim_hi;
  summary.seed = seed;
  summary.min_margin = std::numeric_limits<double>::infinity();

  const std::size_t span = dim_hi - dim_lo + 1;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    SplitMix64 picker = SplitMix64::for_trial(seed, 3 * trial);
    const std::size_t n = dim_lo + static_cast<std::size_t>(picker.next() % span);
    const double t = picker.uniform(0.0, 1.0);
    const SymMatrix a = random_pd_matrix(n, seed, 3 * trial + 1);
    const SymMatrix b = random_pd_matrix(n, seed, 3 * trial + 2);
    const LemmaGapReport rep = logdet_strong_convexity_check(a, b, t);
    if (rep.margin < summary.min_margin) {
      summary.min_margin = rep.margin;
      summary.argmin_trial = trial;
      summary.argmin_t = t;
      summary.argmin_a = a.data();
      summary.argmin_b = b.data();
      summary.argmin_dim = n;
    }
  }
  return summary;
}

nlohmann::ordered_json to_json(const LemmaFuzzSummary& s) {
  nlohmann::ordered_json j;
  j["trials"] = s.trials;
  j["dim_lo"] = s.dim_lo;
  j["dim_hi"] = s.dim_hi;
  j["seed"] = s.seed;
  j["min_margin"] = s.min_margin;
  j["argmin"] = nlohmann::ordered_json{{"trial", s.argmin_trial},
                                       {"t", s.argmin_t},
                                       {"dim", s.argmin_dim},
                                       {"a", s.argmin_a},
                                       {"b", s.argmin_b}};
  return j;
}

}  // namespace epilab
