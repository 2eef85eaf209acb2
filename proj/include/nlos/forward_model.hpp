#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "nlos/image.hpp"

namespace nlos {

/// Parallel-plane scene: hidden emitter plane and diffuse wall plane
/// separated by standoff_m, both axis-aligned square grids centered on
/// the optical axis.
struct SceneGeometry {
    double standoff_m = 0.25;
    double target_extent_m = 0.03;
    int target_res = 28;
    double wall_extent_m = 1.0;
    int wall_res = 128;

    double targetPitch() const { return target_extent_m / target_res; }
    double wallPitch() const { return wall_extent_m / wall_res; }
    double targetPixelArea() const { return targetPitch() * targetPitch(); }

    void check() const;
};

struct Pose {
    double dx_m = 0.0;
    double dy_m = 0.0;
};

/// Emitter exitance map with its in-plane pose offset.
struct TargetFrame {
    Image image;  // target_res x target_res, values in [0,1]
    Pose pose;
};

struct TrajectoryKnot {
    uint64_t t_us = 0;
    Pose pose;
};

struct Trajectory {
    std::vector<TrajectoryKnot> knots;

    /// Linear interpolation between knots; clamped outside the range.
    Pose poseAt(uint64_t t_us) const;
};

struct WallFrame {
    uint64_t t_us = 0;
    Image image;  // wall_res x wall_res irradiance, nonnegative
};

/// Lambertian parallel-plane transport kernel sampled on the wall grid,
/// centered: K(u) = dA * d^2 / (pi * (d^2 + |u|^2)^2).
Image diffuseKernel(const SceneGeometry& geometry);

/// Fraction of a unit-exitance pixel's flux landing within radius r of
/// its foot point: r^2 / (d^2 + r^2). Times dA gives absolute flux.
double capturedFraction(const SceneGeometry& geometry, double radius_m);

/// Nearest-grid placement of the target exitance map into the wall grid
/// at the given pose. Throws PoseOutOfBounds if any target pixel falls
/// off the wall grid.
Image placeTarget(const TargetFrame& target, const SceneGeometry& geometry);

/// Zero-padded convolution of the placed target with the diffuse kernel.
WallFrame renderWallFrame(const TargetFrame& target, const SceneGeometry& geometry);

/// Reference O(N^4) direct transport sum, for cross-checks on small grids.
WallFrame renderWallFrameDirect(const TargetFrame& target, const SceneGeometry& geometry);

/// One frame per sample time at the given rate, poses interpolated along
/// the trajectory. Timestamps in integer microseconds.
std::vector<WallFrame> renderVideo(const Image& targetImage, const Trajectory& trajectory,
                                   double frame_rate_hz, const SceneGeometry& geometry);

/// Renders many frames against one geometry, reusing the kernel spectrum.
class WallRenderer {
public:
    explicit WallRenderer(const SceneGeometry& geometry);
    WallFrame render(const TargetFrame& target) const;

private:
    SceneGeometry geometry_;
    int padded_ = 0;
    std::vector<std::complex<double>> kernel_spectrum_;
};

}  // namespace nlos
