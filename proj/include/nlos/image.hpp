#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nlos/errors.hpp"

namespace nlos {

/// Dense row-major grayscale image of doubles.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }

    bool sameDims(const Image& other) const {
        return width == other.width && height == other.height;
    }

    double sum() const;
    double maxValue() const;
    Image& clampNonNegative();
    Image& clampUnit();
};

/// Area-average resample to the given size. Handles non-integer box
/// boundaries by fractional pixel coverage.
Image areaResample(const Image& src, int outWidth, int outHeight);

/// Shift by whole pixels with zero fill.
Image shiftImage(const Image& src, int dx, int dy);

/// 16-bit binary PGM (P5, maxval 65535, big-endian samples).
/// Values are stored as round(v * 65535 / scale); scale defaults to 1.
void writePgm16(const std::string& path, const Image& img, double scale = 1.0);
Image readPgm16(const std::string& path, double scale = 1.0);

}  // namespace nlos
