#pragma once

#include <cstdint>
#include <string>

#include "nlos/image.hpp"

namespace nlos {

enum class SsimWindow { Global, Gaussian11x11 };

struct SsimConfig {
    SsimWindow window = SsimWindow::Global;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

/// 10*log10(peak^2 / MSE); +inf for identical images.
double psnr(const Image& a, const Image& b, double peak);

double mse(const Image& a, const Image& b);

double ssim(const Image& a, const Image& b, const SsimConfig& config = {});

struct CdConfig {
    int binarize_threshold = 128;  // on the 8-bit scale, in [1, 255]
};

/// Mean column index of the first foreground pixel per row, after
/// scaling values to 8-bit and binarizing. Rows without foreground are
/// excluded; throws NoForeground if none remain.
double contourDistance(const Image& image, const CdConfig& config = {});

/// |Cd(recon) - Cd(gt)|; NoForeground errors are tagged with the image.
double cdDeviation(const Image& recon, const Image& gt, const CdConfig& config = {});

struct DataVolumeReport {
    uint64_t event_bytes = 0;
    uint64_t frame_bytes = 0;
    double ratio = 0.0;
    std::string summary;
};

DataVolumeReport dataVolumeReport(uint64_t event_bytes, uint64_t frame_bytes);

}  // namespace nlos
