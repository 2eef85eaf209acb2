#pragma once

#include "nlos/image.hpp"

namespace nlos {

/// Self-contained block-digit glyphs rendered from a 5x7 bitmap font
/// into a 28x28 canvas. The variant index selects deterministic stroke
/// and scale variations of the same digit.
Image builtinDigit(int digit, int variant = 0);

constexpr int kDigitCanvas = 28;
constexpr int kMaxDigitVariants = 14;

}  // namespace nlos
