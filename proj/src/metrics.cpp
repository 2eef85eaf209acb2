#include "nlos/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace nlos {

double mse(const Image& a, const Image& b) {
    if (!a.sameDims(b)) throw DimMismatch("mse: image dimensions differ");
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.data.size());
}

double psnr(const Image& a, const Image& b, double peak) {
    const double m = mse(a, b);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / m);
}

namespace {

struct Moments {
    double mu_a, mu_b, var_a, var_b, cov;
};

double ssimFromMoments(const Moments& m, double c1, double c2) {
    return ((2.0 * m.mu_a * m.mu_b + c1) * (2.0 * m.cov + c2)) /
           ((m.mu_a * m.mu_a + m.mu_b * m.mu_b + c1) * (m.var_a + m.var_b + c2));
}

std::vector<double> gaussianWindow11(double sigma = 1.5) {
    std::vector<double> w(11 * 11);
    double sum = 0.0;
    for (int y = 0; y < 11; ++y) {
        for (int x = 0; x < 11; ++x) {
            const double dx = x - 5, dy = y - 5;
            const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            w[y * 11 + x] = v;
            sum += v;
        }
    }
    for (double& v : w) v /= sum;
    return w;
}

}  // namespace

double ssim(const Image& a, const Image& b, const SsimConfig& config) {
    if (!a.sameDims(b)) throw DimMismatch("ssim: image dimensions differ");
    const double c1 = (config.k1 * config.dynamic_range) * (config.k1 * config.dynamic_range);
    const double c2 = (config.k2 * config.dynamic_range) * (config.k2 * config.dynamic_range);

    if (config.window == SsimWindow::Global) {
        const double n = static_cast<double>(a.data.size());
        Moments m{};
        for (size_t i = 0; i < a.data.size(); ++i) {
            m.mu_a += a.data[i];
            m.mu_b += b.data[i];
        }
        m.mu_a /= n;
        m.mu_b /= n;
        for (size_t i = 0; i < a.data.size(); ++i) {
            const double da = a.data[i] - m.mu_a;
            const double db = b.data[i] - m.mu_b;
            m.var_a += da * da;
            m.var_b += db * db;
            m.cov += da * db;
        }
        m.var_a /= n;
        m.var_b /= n;
        m.cov /= n;
        return ssimFromMoments(m, c1, c2);
    }

    // Gaussian 11x11, sigma 1.5; SSIM map over the valid interior, averaged.
    if (a.width < 11 || a.height < 11) {
        throw DimMismatch("ssim: image smaller than the 11x11 window");
    }
    static const std::vector<double> win = gaussianWindow11();
    double acc = 0.0;
    int count = 0;
    for (int y = 0; y + 11 <= a.height; ++y) {
        for (int x = 0; x + 11 <= a.width; ++x) {
            Moments m{};
            double ea2 = 0.0, eb2 = 0.0, eab = 0.0;
            for (int wy = 0; wy < 11; ++wy) {
                for (int wx = 0; wx < 11; ++wx) {
                    const double g = win[wy * 11 + wx];
                    const double va = a.at(y + wy, x + wx);
                    const double vb = b.at(y + wy, x + wx);
                    m.mu_a += g * va;
                    m.mu_b += g * vb;
                    ea2 += g * va * va;
                    eb2 += g * vb * vb;
                    eab += g * va * vb;
                }
            }
            m.var_a = ea2 - m.mu_a * m.mu_a;
            m.var_b = eb2 - m.mu_b * m.mu_b;
            m.cov = eab - m.mu_a * m.mu_b;
            acc += ssimFromMoments(m, c1, c2);
            ++count;
        }
    }
    return acc / count;
}

double contourDistance(const Image& image, const CdConfig& config) {
    if (config.binarize_threshold < 1 || config.binarize_threshold > 255) {
        throw DimMismatch("contour_distance: threshold must be in [1, 255]");
    }
    if (image.width < 1 || image.height < 1) throw DimMismatch("contour_distance: empty image");
    double sum = 0.0;
    int rows = 0;
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const long v8 = std::lround(std::clamp(image.at(y, x), 0.0, 1.0) * 255.0);
            if (v8 >= config.binarize_threshold) {
                sum += x;
                ++rows;
                break;
            }
        }
    }
    if (rows == 0) throw NoForeground("contour_distance: no foreground after binarization");
    return sum / rows;
}

double cdDeviation(const Image& recon, const Image& gt, const CdConfig& config) {
    double cdRecon = 0.0, cdGt = 0.0;
    try {
        cdRecon = contourDistance(recon, config);
    } catch (const NoForeground&) {
        throw NoForeground("cd_deviation: no foreground in reconstruction");
    }
    try {
        cdGt = contourDistance(gt, config);
    } catch (const NoForeground&) {
        throw NoForeground("cd_deviation: no foreground in ground truth");
    }
    return std::abs(cdRecon - cdGt);
}

DataVolumeReport dataVolumeReport(uint64_t event_bytes, uint64_t frame_bytes) {
    if (frame_bytes == 0) throw DimMismatch("data_volume_report: frame bytes must be > 0");
    DataVolumeReport r;
    r.event_bytes = event_bytes;
    r.frame_bytes = frame_bytes;
    r.ratio = static_cast<double>(event_bytes) / static_cast<double>(frame_bytes);
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << "events " << event_bytes / 1048576.0 << " MiB vs frames "
        << frame_bytes / 1048576.0 << " MiB (ratio ";
    out.precision(4);
    out << r.ratio << ")";
    r.summary = out.str();
    return r;
}

}  // namespace nlos
