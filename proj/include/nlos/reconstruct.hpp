#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nlos/forward_model.hpp"
#include "nlos/image.hpp"
#include "nlos/metrics.hpp"

namespace nlos {

/// Frequency-domain regularized deconvolution:
/// estimate = IFFT( conj(H) * W / (|H|^2 + lambda) ), clipped at >= 0.
/// The kernel's origin is taken at its center cell, matching the renderer.
Image wienerDeconvolve(const Image& wall, const Image& kernel, double lambda);

/// Deconvolve and crop to the target footprint at the given pose.
Image wienerDeconvolveTarget(const WallFrame& wall, const Image& kernel, double lambda,
                             const SceneGeometry& geometry, const Pose& pose);

/// alpha * MSE + beta * (1 - SSIM); SSIM uses the global window so the
/// loss has a closed-form gradient.
double compositeLoss(const Image& pred, const Image& gt, double alpha, double beta);

/// d(compositeLoss)/d(pred), per pixel.
Image lossGradient(const Image& pred, const Image& gt, double alpha, double beta);

struct LinearReconstructor {
    Eigen::MatrixXd weights;  // out_dims x in_dims
    Eigen::VectorXd bias;     // out_dims
    int in_dims = 0;
    int out_dims = 0;
};

struct TrainConfig {
    double alpha = 1.0;
    double beta = 0.1;
    double lr = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int epochs = 200;
    double ridge_lambda = 1.0;
    uint64_t seed = 0;
    bool ridge_init = true;

    void check() const;
};

struct TrainSample {
    Eigen::VectorXd feature;  // flattened input
    Eigen::VectorXd target;   // flattened output
};

/// Closed-form ridge solve of (X^T X + lambda I) W = X^T Y with an
/// unregularized bias via an augmented constant feature.
LinearReconstructor fitRidge(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                             double lambda);

struct TrainResult {
    LinearReconstructor model;
    std::vector<double> loss_trace;  // composite loss at the start of each epoch
};

/// Full-batch Adam on weights and bias with the composite loss; the
/// image shape (width, height) is needed for the SSIM term.
TrainResult trainAdam(const std::vector<TrainSample>& samples, const TrainConfig& config,
                      int out_width, int out_height);

/// W * x + b, reshaped and clipped to [0,1].
Image predict(const LinearReconstructor& model, const Eigen::VectorXd& feature, int out_width,
              int out_height);

Eigen::VectorXd flatten(const Image& img);
Image unflatten(const Eigen::VectorXd& v, int width, int height);

/// Flat binary model format "NLRW": magic, version byte, in/out dims as
/// 16-bit LE, weights row-major then bias as 64-bit IEEE-754 LE.
void writeModelFile(const std::string& path, const LinearReconstructor& model);
LinearReconstructor readModelFile(const std::string& path);

}  // namespace nlos
