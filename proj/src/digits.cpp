#include "nlos/digits.hpp"

#include <array>
#include <cstdint>

#include "nlos/errors.hpp"

namespace nlos {

namespace {

// Classic 5x7 bitmap font, one row per byte, bit 4 = leftmost column.
constexpr std::array<std::array<uint8_t, 7>, 10> kFont = {{
    {0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e},  // 0
    {0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e},  // 1
    {0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f},  // 2
    {0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e},  // 3
    {0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02},  // 4
    {0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e},  // 5
    {0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e},  // 6
    {0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e},  // 8
    {0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c},  // 9
}};

Image dilate4(const Image& src) {
    Image out = src;
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            if (src.at(y, x) <= 0.0) continue;
            if (y > 0) out.at(y - 1, x) = 1.0;
            if (y + 1 < src.height) out.at(y + 1, x) = 1.0;
            if (x > 0) out.at(y, x - 1) = 1.0;
            if (x + 1 < src.width) out.at(y, x + 1) = 1.0;
        }
    }
    return out;
}

}  // namespace

Image builtinDigit(int digit, int variant) {
    if (digit < 0 || digit > 9) throw IndexOutOfRange("builtinDigit: digit must be 0..9");
    if (variant < 0 || variant >= kMaxDigitVariants) {
        throw IndexOutOfRange("builtinDigit: variant out of range");
    }
    const int scale = 3 - (variant / 3) % 2;  // 3 or 2
    const int dilations = variant % 3;        // 0, 1 or 2
    const int gw = 5 * scale;
    const int gh = 7 * scale;
    const int x0 = (kDigitCanvas - gw) / 2;
    const int y0 = (kDigitCanvas - gh) / 2;
    Image img(kDigitCanvas, kDigitCanvas);
    for (int r = 0; r < 7; ++r) {
        for (int c = 0; c < 5; ++c) {
            if (!(kFont[digit][r] & (1 << (4 - c)))) continue;
            for (int dy = 0; dy < scale; ++dy)
                for (int dx = 0; dx < scale; ++dx)
                    img.at(y0 + r * scale + dy, x0 + c * scale + dx) = 1.0;
        }
    }
    for (int i = 0; i < dilations; ++i) img = dilate4(img);
    return img;
}

}  // namespace nlos
