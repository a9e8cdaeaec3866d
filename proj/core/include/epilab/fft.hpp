#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace epilab {

/// In-place radix-2 FFT; data.size() must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse);

// Linear convolution of two real sequences sampled on a common uniform grid,
// scaled by the grid spacing so the result approximates (f*g)(x) = ∫ f g.
// Output length is a.size() + b.size() - 1; entry k sits at position
// pos_a(0) + pos_b(0) + k * spacing.
std::vector<double> convolve_linear(const std::vector<double>& a,
                                    const std::vector<double>& b,
                                    double spacing);

}  // namespace epilab
