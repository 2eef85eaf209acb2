#include <doctest.h>

#include <cmath>
#include <random>

#include "nlos/metrics.hpp"

using namespace nlos;

namespace {

Image constantImage(int n, double v) { return Image(n, n, v); }

Image randomImage(std::mt19937_64& rng, int w, int h) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Image img(w, h);
    for (double& v : img.data) v = u(rng);
    return img;
}

}  // namespace

TEST_CASE("psnr sentinel and closed forms") {
    auto a = constantImage(16, 0.5);
    CHECK(std::isinf(psnr(a, a, 1.0)));

    // 8-bit images offset by 16: MSE = 256 on the 0..255 scale.
    auto b = a;
    for (double& v : b.data) v += 16.0 / 255.0;
    CHECK(psnr(a, b, 1.0) == doctest::Approx(10.0 * std::log10(255.0 * 255.0 / 256.0)).epsilon(1e-9));
    CHECK(std::abs(psnr(a, b, 1.0) - 24.05) <= 0.01);

    // Unit-range offset 0.1: MSE = 0.01 -> 20 dB.
    auto c = a;
    for (double& v : c.data) v += 0.1;
    CHECK(psnr(a, c, 1.0) == doctest::Approx(20.0).epsilon(1e-9));

    CHECK_THROWS_AS(psnr(a, constantImage(8, 0.5), 1.0), DimMismatch);
}

TEST_CASE("psnr is symmetric and decreases with noise amplitude") {
    std::mt19937_64 rng(1);
    auto a = randomImage(rng, 12, 12);
    double prev = std::numeric_limits<double>::infinity();
    for (double amp : {0.01, 0.05, 0.1}) {
        auto b = a;
        std::uniform_real_distribution<double> u(-amp, amp);
        for (double& v : b.data) v += u(rng);
        CHECK(psnr(a, b, 1.0) == doctest::Approx(psnr(b, a, 1.0)));
        CHECK(psnr(a, b, 1.0) < prev);
        prev = psnr(a, b, 1.0);
    }
}

TEST_CASE("ssim closed form for constant images, global window") {
    auto a = constantImage(10, 0.5);
    CHECK(ssim(a, a) == 1.0);

    auto b = constantImage(10, 0.25);
    // (2*0.125 + 1e-4) / (0.3125 + 1e-4), variance terms collapse to C2/C2.
    const double expected = (2.0 * 0.125 + 1e-4) / (0.3125 + 1e-4);
    CHECK(ssim(a, b) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(ssim(a, b) == doctest::Approx(0.8001).epsilon(5e-4));
}

TEST_CASE("ssim is below 1 for distinct images and translation invariant globally") {
    std::mt19937_64 rng(2);
    auto a = randomImage(rng, 14, 14);
    auto b = constantImage(14, 0.3);
    CHECK(ssim(a, b) < 1.0);

    // Shift both images together; global stats are unchanged if nothing
    // falls off, so roll circularly.
    auto rollBoth = [](const Image& src, int k) {
        Image out(src.width, src.height);
        for (int y = 0; y < src.height; ++y)
            for (int x = 0; x < src.width; ++x)
                out.at(y, x) = src.at(y, (x + k) % src.width);
        return out;
    };
    auto c = randomImage(rng, 14, 14);
    CHECK(ssim(rollBoth(a, 3), rollBoth(c, 3)) == doctest::Approx(ssim(a, c)).epsilon(1e-12));
}

TEST_CASE("gaussian-window ssim matches the global value on constants") {
    auto a = constantImage(16, 0.5);
    auto b = constantImage(16, 0.25);
    SsimConfig g{SsimWindow::Gaussian11x11};
    const double expected = (2.0 * 0.125 + 1e-4) / (0.3125 + 1e-4);
    CHECK(ssim(a, b, g) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(ssim(a, a, g) == doctest::Approx(1.0));
    CHECK_THROWS_AS(ssim(constantImage(8, 0.1), constantImage(8, 0.1), g), DimMismatch);
}

TEST_CASE("contour distance of a vertical bar") {
    Image bar(12, 12, 0.0);
    for (int y = 0; y < 12; ++y) bar.at(y, 5) = 1.0;
    CHECK(contourDistance(bar) == 5.0);

    Image left(12, 12, 0.0);
    for (int y = 0; y < 12; ++y) left.at(y, 0) = 1.0;
    CHECK(contourDistance(left) == 0.0);

    CHECK_THROWS_AS(contourDistance(Image(12, 12, 0.0)), NoForeground);
}

TEST_CASE("contour distance excludes empty rows and respects the threshold") {
    Image img(10, 10, 0.0);
    img.at(2, 4) = 1.0;
    img.at(7, 6) = 1.0;
    img.at(5, 1) = 0.3;  // below 128/255 after 8-bit scaling
    CHECK(contourDistance(img) == doctest::Approx(5.0));

    CdConfig loose;
    loose.binarize_threshold = 50;
    CHECK(contourDistance(img, loose) == doctest::Approx((4.0 + 6.0 + 1.0) / 3.0));
}

TEST_CASE("contour distance is translation covariant") {
    std::mt19937_64 rng(5);
    Image img(16, 16, 0.0);
    for (int i = 0; i < 12; ++i)
        img.at(rng() % 16, 2 + rng() % 8) = 1.0;
    const double base = contourDistance(img);
    for (int k : {1, 3, 5}) {
        const Image shifted = shiftImage(img, k, 0);
        CHECK(contourDistance(shifted) == doctest::Approx(base + k).epsilon(1e-12));
    }
}

TEST_CASE("cd deviation") {
    Image bar5(12, 12, 0.0), bar9(12, 12, 0.0);
    for (int y = 0; y < 12; ++y) {
        bar5.at(y, 5) = 1.0;
        bar9.at(y, 9) = 1.0;
    }
    CHECK(cdDeviation(bar5, bar5) == 0.0);
    CHECK(cdDeviation(bar9, bar5) == 4.0);

    try {
        cdDeviation(Image(12, 12, 0.0), bar5);
        FAIL("expected NoForeground");
    } catch (const NoForeground& e) {
        CHECK(std::string(e.what()).find("reconstruction") != std::string::npos);
    }
    try {
        cdDeviation(bar5, Image(12, 12, 0.0));
        FAIL("expected NoForeground");
    } catch (const NoForeground& e) {
        CHECK(std::string(e.what()).find("ground truth") != std::string::npos);
    }
}

TEST_CASE("data volume report") {
    const uint64_t ev = static_cast<uint64_t>(5.96 * 1048576);
    const uint64_t fr = static_cast<uint64_t>(291.51 * 1048576);
    auto r = dataVolumeReport(ev, fr);
    CHECK(r.ratio == doctest::Approx(0.0204).epsilon(0.01));

    CHECK(dataVolumeReport(1000, 1000).ratio == 1.0);
    // An empty NEVT1 stream is exactly its 20-byte header.
    CHECK(dataVolumeReport(20, 1048576).ratio == doctest::Approx(20.0 / 1048576));
    CHECK_THROWS_AS(dataVolumeReport(10, 0), DimMismatch);
}
