#include "nlos/forward_model.hpp"

#include <cmath>
#include <numbers>

#include "nlos/fft.hpp"

namespace nlos {

void SceneGeometry::check() const {
    if (standoff_m <= 0.0 || target_extent_m <= 0.0 || wall_extent_m <= 0.0 ||
        target_res < 1 || wall_res < 1) {
        throw DimMismatch("SceneGeometry: all fields must be strictly positive");
    }
    if (wall_extent_m < target_extent_m) {
        throw DimMismatch("SceneGeometry: wall extent smaller than target extent");
    }
}

Pose Trajectory::poseAt(uint64_t t_us) const {
    if (knots.empty()) throw EmptyTrajectory("trajectory has no knots");
    if (t_us <= knots.front().t_us) return knots.front().pose;
    if (t_us >= knots.back().t_us) return knots.back().pose;
    for (size_t i = 1; i < knots.size(); ++i) {
        if (t_us <= knots[i].t_us) {
            const auto& a = knots[i - 1];
            const auto& b = knots[i];
            const double f = static_cast<double>(t_us - a.t_us) /
                             static_cast<double>(b.t_us - a.t_us);
            return Pose{a.pose.dx_m + f * (b.pose.dx_m - a.pose.dx_m),
                        a.pose.dy_m + f * (b.pose.dy_m - a.pose.dy_m)};
        }
    }
    return knots.back().pose;
}

Image diffuseKernel(const SceneGeometry& geometry) {
    geometry.check();
    const int n = geometry.wall_res;
    const double pitch = geometry.wallPitch();
    const double d2 = geometry.standoff_m * geometry.standoff_m;
    const double dA = geometry.targetPixelArea();
    const int c = n / 2;
    Image k(n, n);
    for (int y = 0; y < n; ++y) {
        const double uy = (y - c) * pitch;
        for (int x = 0; x < n; ++x) {
            const double ux = (x - c) * pitch;
            const double r2 = ux * ux + uy * uy;
            const double denom = (d2 + r2) * (d2 + r2);
            k.at(y, x) = dA * d2 / (std::numbers::pi * denom);
        }
    }
    return k;
}

double capturedFraction(const SceneGeometry& geometry, double radius_m) {
    const double d2 = geometry.standoff_m * geometry.standoff_m;
    return radius_m * radius_m / (d2 + radius_m * radius_m);
}

Image placeTarget(const TargetFrame& target, const SceneGeometry& geometry) {
    geometry.check();
    if (target.image.width != geometry.target_res || target.image.height != geometry.target_res) {
        throw DimMismatch("placeTarget: target image does not match target_res");
    }
    const double tp = geometry.targetPitch();
    const double wp = geometry.wallPitch();
    const double halfTarget = geometry.target_extent_m / 2.0;
    const double halfWall = geometry.wall_extent_m / 2.0;
    Image placed(geometry.wall_res, geometry.wall_res);
    for (int r = 0; r < geometry.target_res; ++r) {
        const double yw = target.pose.dy_m + (r + 0.5) * tp - halfTarget;
        const int j = static_cast<int>(std::floor((yw + halfWall) / wp));
        for (int c = 0; c < geometry.target_res; ++c) {
            const double xw = target.pose.dx_m + (c + 0.5) * tp - halfTarget;
            const int i = static_cast<int>(std::floor((xw + halfWall) / wp));
            if (i < 0 || i >= geometry.wall_res || j < 0 || j >= geometry.wall_res) {
                throw PoseOutOfBounds("placeTarget: target pixel off the wall grid");
            }
            placed.at(j, i) += target.image.at(r, c);
        }
    }
    return placed;
}

WallFrame renderWallFrame(const TargetFrame& target, const SceneGeometry& geometry) {
    return WallRenderer(geometry).render(target);
}

WallRenderer::WallRenderer(const SceneGeometry& geometry) : geometry_(geometry) {
    const Image kernel = diffuseKernel(geometry_);
    const int n = geometry_.wall_res;
    const int c = n / 2;
    padded_ = nextPowerOfTwo(2 * n);
    kernel_spectrum_.assign(static_cast<size_t>(padded_) * padded_, Complex{});
    for (int y = 0; y < n; ++y) {
        const int wy = ((y - c) % padded_ + padded_) % padded_;
        for (int x = 0; x < n; ++x) {
            const int wx = ((x - c) % padded_ + padded_) % padded_;
            kernel_spectrum_[static_cast<size_t>(wy) * padded_ + wx] = kernel.at(y, x);
        }
    }
    fft2d(kernel_spectrum_, padded_, padded_, false);
}

WallFrame WallRenderer::render(const TargetFrame& target) const {
    const Image placed = placeTarget(target, geometry_);
    const int n = geometry_.wall_res;
    const int p = padded_;
    std::vector<Complex> a(static_cast<size_t>(p) * p);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) a[static_cast<size_t>(y) * p + x] = placed.at(y, x);
    fft2d(a, p, p, false);
    for (size_t i = 0; i < a.size(); ++i) a[i] *= kernel_spectrum_[i];
    fft2d(a, p, p, true);
    WallFrame frame;
    frame.image = Image(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) frame.image.at(y, x) = a[static_cast<size_t>(y) * p + x].real();
    frame.image.clampNonNegative();
    return frame;
}

WallFrame renderWallFrameDirect(const TargetFrame& target, const SceneGeometry& geometry) {
    const Image placed = placeTarget(target, geometry);
    const Image kernel = diffuseKernel(geometry);
    const int n = geometry.wall_res;
    const int c = n / 2;
    WallFrame frame;
    frame.image = Image(n, n);
    for (int vy = 0; vy < n; ++vy) {
        for (int vx = 0; vx < n; ++vx) {
            double acc = 0.0;
            for (int uy = 0; uy < n; ++uy) {
                for (int ux = 0; ux < n; ++ux) {
                    const double s = placed.at(uy, ux);
                    if (s == 0.0) continue;
                    const int ky = vy - uy + c;
                    const int kx = vx - ux + c;
                    if (ky < 0 || ky >= n || kx < 0 || kx >= n) continue;
                    acc += s * kernel.at(ky, kx);
                }
            }
            frame.image.at(vy, vx) = acc;
        }
    }
    return frame;
}

std::vector<WallFrame> renderVideo(const Image& targetImage, const Trajectory& trajectory,
                                   double frame_rate_hz, const SceneGeometry& geometry) {
    if (trajectory.knots.empty()) throw EmptyTrajectory("renderVideo: empty trajectory");
    for (size_t i = 1; i < trajectory.knots.size(); ++i) {
        if (trajectory.knots[i].t_us <= trajectory.knots[i - 1].t_us) {
            throw NonMonotonicTimestamps("renderVideo: trajectory timestamps must strictly increase");
        }
    }
    if (frame_rate_hz <= 0.0) throw DimMismatch("renderVideo: frame rate must be positive");
    const uint64_t t0 = trajectory.knots.front().t_us;
    const uint64_t t1 = trajectory.knots.back().t_us;
    const double duration_s = static_cast<double>(t1 - t0) * 1e-6;
    const int nFrames = static_cast<int>(std::floor(duration_s * frame_rate_hz + 1e-9)) + 1;
    const WallRenderer renderer(geometry);
    std::vector<WallFrame> frames;
    frames.reserve(nFrames);
    for (int k = 0; k < nFrames; ++k) {
        const uint64_t t = t0 + static_cast<uint64_t>(std::llround(k * 1e6 / frame_rate_hz));
        TargetFrame tf;
        tf.image = targetImage;
        tf.pose = trajectory.poseAt(t);
        WallFrame frame = renderer.render(tf);
        frame.t_us = t;
        frames.push_back(std::move(frame));
    }
    return frames;
}

}  // namespace nlos
