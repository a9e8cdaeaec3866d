#include "epilab/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace epilab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void fft_inplace(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft_inplace: length must be a power of two");

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& z : data) z *= inv_n;
  }
}

std::vector<double> convolve_linear(const std::vector<double>& a,
                                    const std::vector<double>& b,
                                    double spacing) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("convolve_linear: empty input");
  const std::size_t out_len = a.size() + b.size() - 1;
  std::size_t m = 1;
  while (m < out_len) m <<= 1;

  std::vector<std::complex<double>> fa(m), fb(m);
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  fft_inplace(fa, false);
  fft_inplace(fb, false);
  for (std::size_t i = 0; i < m; ++i) fa[i] *= fb[i];
  fft_inplace(fa, true);

  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = fa[i].real() * spacing;
  return out;
}

}  // namespace epilab
