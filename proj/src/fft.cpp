#include "nlos/fft.hpp"

#include <cmath>
#include <numbers>

#include "nlos/errors.hpp"

namespace nlos {

int nextPowerOfTwo(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft1d(std::vector<Complex>& a, bool inverse) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw DimMismatch("fft1d: size must be a power of two");
    // Bit-reversal permutation.
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const Complex wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& v : a) v *= inv;
    }
}

void fft2d(std::vector<Complex>& a, int width, int height, bool inverse) {
    if (a.size() != static_cast<size_t>(width) * height) {
        throw DimMismatch("fft2d: buffer size mismatch");
    }
    std::vector<Complex> row(static_cast<size_t>(width));
    for (int y = 0; y < height; ++y) {
        std::copy(a.begin() + static_cast<size_t>(y) * width,
                  a.begin() + static_cast<size_t>(y + 1) * width, row.begin());
        fft1d(row, inverse);
        std::copy(row.begin(), row.end(), a.begin() + static_cast<size_t>(y) * width);
    }
    std::vector<Complex> col(static_cast<size_t>(height));
    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y) col[y] = a[static_cast<size_t>(y) * width + x];
        fft1d(col, inverse);
        for (int y = 0; y < height; ++y) a[static_cast<size_t>(y) * width + x] = col[y];
    }
}

}  // namespace nlos
