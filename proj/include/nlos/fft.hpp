#pragma once

#include <complex>
#include <vector>

namespace nlos {

using Complex = std::complex<double>;

/// Smallest power of two >= n (n >= 1).
int nextPowerOfTwo(int n);

/// In-place iterative radix-2 transform; size must be a power of two.
void fft1d(std::vector<Complex>& a, bool inverse);

/// Row-column 2-D transform on a row-major buffer of width*height
/// complex samples; both dimensions must be powers of two.
void fft2d(std::vector<Complex>& a, int width, int height, bool inverse);

}  // namespace nlos
