#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace epilab {

// Dense symmetric matrix, desk scale (n <= 16 in practice). Symmetry is
// validated on construction from full data; mutation goes through set() which
// writes both triangles.
class SymMatrix {
 public:
  explicit SymMatrix(std::size_t n);
  static SymMatrix identity(std::size_t n);
  static SymMatrix diagonal(const std::vector<double>& d);
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t dim() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    a_[i * n_ + j] = v;
    a_[j * n_ + i] = v;
  }

  double trace() const;
  double frobenius_norm() const;
  const std::vector<double>& data() const { return a_; }  // row-major

  SymMatrix operator+(const SymMatrix& other) const;
  SymMatrix operator-(const SymMatrix& other) const;
  SymMatrix scaled(double c) const;

 private:
  std::size_t n_;
  std::vector<double> a_;
};

struct SpectralDecomposition {
  std::vector<double> eigenvalues;  // ascending
  std::vector<double> vectors;      // column-major, column k pairs with eigenvalues[k]
  std::size_t dim = 0;

  double vector_entry(std::size_t row, std::size_t k) const {
    return vectors[k * dim + row];
  }
};

/// Cyclic Jacobi to off-diagonal Frobenius norm <= 1e-12 * ||M||_F.
SpectralDecomposition spectral_decompose(const SymMatrix& m);

double lambda_max(const SymMatrix& m);
double lambda_min(const SymMatrix& m);

/// Symmetric PSD square root; eigenvalues below -1e-10 * scale are rejected.
SymMatrix sqrt_psd(const SymMatrix& m);

/// log det for positive definite input.
double log_det_pd(const SymMatrix& m);

/// 1 / max(lambda_max(A), lambda_max(B))^2, valid on the whole segment [A, B].
double strong_convexity_modulus(const SymMatrix& a, const SymMatrix& b);

struct LemmaGapReport {
  double t = 0.0;
  double lhs = 0.0;        // log det(tA + (1-t)B)
  double base = 0.0;       // t log det A + (1-t) log det B
  double remainder = 0.0;  // t(1-t)/(2 max{lmax(A)^2, lmax(B)^2}) ||A-B||_F^2
  double margin = 0.0;     // lhs - base - remainder
};

LemmaGapReport logdet_strong_convexity_check(const SymMatrix& a,
                                             const SymMatrix& b, double t);

/// G^T G + 1e-3 I with standard normal entries from a counter-based stream.
SymMatrix random_pd_matrix(std::size_t n, std::uint64_t seed, std::uint64_t counter);

struct LemmaFuzzSummary {
  std::size_t trials = 0;
  std::size_t dim_lo = 0;
  std::size_t dim_hi = 0;
  std::uint64_t seed = 0;
  double min_margin = 0.0;
  std::size_t argmin_trial = 0;
  double argmin_t = 0.0;
  std::vector<double> argmin_a;  // row-major entries
  std::vector<double> argmin_b;
  std::size_t argmin_dim = 0;
};

/// Seeded fuzz campaign over random PD pairs; deterministic given the seed.
LemmaFuzzSummary lemma_fuzz_campaign(std::size_t trials, std::size_t dim_lo,
                                     std::size_t dim_hi, std::uint64_t seed);

nlohmann::ordered_json to_json(const LemmaFuzzSummary& summary);

}  // namespace epilab
