#include "nlos/reconstruct.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "nlos/fft.hpp"

namespace nlos {

Image wienerDeconvolve(const Image& wall, const Image& kernel, double lambda) {
    if (!wall.sameDims(kernel)) throw DimMismatch("wiener_deconvolve: wall/kernel grids differ");
    if (lambda < 0.0) throw DimMismatch("wiener_deconvolve: lambda must be >= 0");
    const int w = wall.width;
    const int h = wall.height;
    const int pw = nextPowerOfTwo(w);
    const int ph = nextPowerOfTwo(h);
    std::vector<Complex> W(static_cast<size_t>(pw) * ph), H(static_cast<size_t>(pw) * ph);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) W[static_cast<size_t>(y) * pw + x] = wall.at(y, x);
    const int cx = w / 2, cy = h / 2;
    for (int y = 0; y < h; ++y) {
        const int wy = ((y - cy) % ph + ph) % ph;
        for (int x = 0; x < w; ++x) {
            const int wx = ((x - cx) % pw + pw) % pw;
            H[static_cast<size_t>(wy) * pw + wx] = kernel.at(y, x);
        }
    }
    fft2d(W, pw, ph, false);
    fft2d(H, pw, ph, false);
    for (size_t i = 0; i < W.size(); ++i) {
        const double h2 = std::norm(H[i]);
        if (lambda == 0.0 && h2 == 0.0) {
            throw SingularKernel("wiener_deconvolve: zero-frequency kernel with lambda = 0");
        }
        W[i] = std::conj(H[i]) * W[i] / (h2 + lambda);
    }
    fft2d(W, pw, ph, true);
    Image out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(y, x) = W[static_cast<size_t>(y) * pw + x].real();
    out.clampNonNegative();
    return out;
}

Image wienerDeconvolveTarget(const WallFrame& wall, const Image& kernel, double lambda,
                             const SceneGeometry& geometry, const Pose& pose) {
    const Image full = wienerDeconvolve(wall.image, kernel, lambda);
    const double tp = geometry.targetPitch();
    const double wp = geometry.wallPitch();
    const double halfT = geometry.target_extent_m / 2.0;
    const double halfW = geometry.wall_extent_m / 2.0;
    auto wallIndex = [&](double offset, double coord) {
        return static_cast<int>(std::floor((coord + offset + halfW) / wp));
    };
    const int x0 = wallIndex(pose.dx_m, 0.5 * tp - halfT);
    const int x1 = wallIndex(pose.dx_m, (geometry.target_res - 0.5) * tp - halfT);
    const int y0 = wallIndex(pose.dy_m, 0.5 * tp - halfT);
    const int y1 = wallIndex(pose.dy_m, (geometry.target_res - 0.5) * tp - halfT);
    if (x0 < 0 || y0 < 0 || x1 >= full.width || y1 >= full.height) {
        throw PoseOutOfBounds("wiener_deconvolve: target footprint off the wall grid");
    }
    Image crop(x1 - x0 + 1, y1 - y0 + 1);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) crop.at(y - y0, x - x0) = full.at(y, x);
    return crop;
}

double compositeLoss(const Image& pred, const Image& gt, double alpha, double beta) {
    if (!pred.sameDims(gt)) throw DimMismatch("composite_loss: image dimensions differ");
    double loss = 0.0;
    if (alpha != 0.0) loss += alpha * mse(pred, gt);
    if (beta != 0.0) loss += beta * (1.0 - ssim(pred, gt));
    return loss;
}

Image lossGradient(const Image& pred, const Image& gt, double alpha, double beta) {
    if (!pred.sameDims(gt)) throw DimMismatch("loss_gradient: image dimensions differ");
    const double n = static_cast<double>(pred.data.size());
    Image grad(pred.width, pred.height);
    for (size_t i = 0; i < pred.data.size(); ++i) {
        grad.data[i] = alpha * 2.0 * (pred.data[i] - gt.data[i]) / n;
    }
    if (beta == 0.0) return grad;

    // Analytic gradient of global-window SSIM.
    const SsimConfig cfg;
    const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
    const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);
    double muA = 0.0, muB = 0.0;
    for (size_t i = 0; i < pred.data.size(); ++i) {
        muA += pred.data[i];
        muB += gt.data[i];
    }
    muA /= n;
    muB /= n;
    double varA = 0.0, varB = 0.0, cov = 0.0;
    for (size_t i = 0; i < pred.data.size(); ++i) {
        const double da = pred.data[i] - muA;
        const double db = gt.data[i] - muB;
        varA += da * da;
        varB += db * db;
        cov += da * db;
    }
    varA /= n;
    varB /= n;
    cov /= n;
    const double lNum = 2.0 * muA * muB + c1;
    const double lDen = muA * muA + muB * muB + c1;
    const double cNum = 2.0 * cov + c2;
    const double cDen = varA + varB + c2;
    const double lTerm = lNum / lDen;
    const double cTerm = cNum / cDen;
    // d(lTerm)/d(muA), constant over pixels; d(muA)/d(a_i) = 1/n.
    const double dL_dMuA = (2.0 * muB * lDen - lNum * 2.0 * muA) / (lDen * lDen);
    for (size_t i = 0; i < pred.data.size(); ++i) {
        const double da = pred.data[i] - muA;
        const double db = gt.data[i] - muB;
        const double dC = (2.0 * db * cDen - cNum * 2.0 * da) / (cDen * cDen) / n;
        const double dSsim = dL_dMuA / n * cTerm + lTerm * dC;
        grad.data[i] += beta * (-dSsim);
    }
    return grad;
}

void TrainConfig::check() const {
    if (alpha < 0.0 || beta < 0.0 || (alpha == 0.0 && beta == 0.0)) {
        throw DimMismatch("TrainConfig: loss weights must be >= 0 and not both zero");
    }
    if (lr <= 0.0) throw DimMismatch("TrainConfig: learning rate must be > 0");
    if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0) {
        throw DimMismatch("TrainConfig: Adam betas must lie in [0, 1)");
    }
    if (epochs < 0 || ridge_lambda < 0.0) {
        throw DimMismatch("TrainConfig: epochs and ridge lambda must be >= 0");
    }
}

LinearReconstructor fitRidge(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets,
                             double lambda) {
    const Eigen::Index s = features.rows();
    const Eigen::Index d = features.cols();
    if (s < 1 || targets.rows() != s) throw DimMismatch("fit_ridge: sample count mismatch");
    if (lambda < 0.0) throw DimMismatch("fit_ridge: lambda must be >= 0");

    Eigen::MatrixXd aug(s, d + 1);
    aug.leftCols(d) = features;
    aug.col(d).setOnes();
    Eigen::MatrixXd A = aug.transpose() * aug;
    A.topLeftCorner(d, d).diagonal().array() += lambda;  // bias stays unregularized
    const Eigen::MatrixXd B = aug.transpose() * targets;

    if (lambda == 0.0) {
        // The normal equations are consistent even when rank deficient, so
        // the residual cannot detect an underdetermined unregularized fit.
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        if (qr.rank() < d + 1) {
            throw SingularSystem("fit_ridge: rank-deficient system with lambda = 0");
        }
    }
    Eigen::LDLT<Eigen::MatrixXd> solver(A);
    Eigen::MatrixXd beta = solver.solve(B);
    const double bNorm = std::max(B.norm(), 1e-300);
    for (int refine = 0; refine < 3; ++refine) {
        const Eigen::MatrixXd residual = B - A * beta;
        if (residual.norm() / bNorm < 1e-12) break;
        beta += solver.solve(residual);
    }
    const double rel = (B - A * beta).norm() / bNorm;
    if (!beta.allFinite() || rel > 1e-10) {
        throw SingularSystem("fit_ridge: normal equations not solvable to tolerance (relative residual " +
                             std::to_string(rel) + ")");
    }

    LinearReconstructor model;
    model.in_dims = static_cast<int>(d);
    model.out_dims = static_cast<int>(targets.cols());
    model.weights = beta.topRows(d).transpose();
    model.bias = beta.row(d).transpose();
    return model;
}

TrainResult trainAdam(const std::vector<TrainSample>& samples, const TrainConfig& config,
                      int out_width, int out_height) {
    config.check();
    if (samples.empty()) throw DimMismatch("train_adam: empty sample set");
    const Eigen::Index d = samples[0].feature.size();
    const Eigen::Index o = samples[0].target.size();
    if (o != static_cast<Eigen::Index>(out_width) * out_height) {
        throw DimMismatch("train_adam: target size does not match output shape");
    }
    const Eigen::Index s = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd X(s, d), Y(s, o);
    for (Eigen::Index i = 0; i < s; ++i) {
        if (samples[i].feature.size() != d || samples[i].target.size() != o) {
            throw DimMismatch("train_adam: inconsistent sample dimensions");
        }
        X.row(i) = samples[i].feature;
        Y.row(i) = samples[i].target;
    }

    LinearReconstructor model;
    if (config.ridge_init) {
        model = fitRidge(X, Y, config.ridge_lambda);
    } else {
        model.in_dims = static_cast<int>(d);
        model.out_dims = static_cast<int>(o);
        model.weights = Eigen::MatrixXd::Zero(o, d);
        model.bias = Eigen::VectorXd::Zero(o);
    }

    Eigen::MatrixXd mW = Eigen::MatrixXd::Zero(o, d), vW = Eigen::MatrixXd::Zero(o, d);
    Eigen::VectorXd mB = Eigen::VectorXd::Zero(o), vB = Eigen::VectorXd::Zero(o);

    TrainResult result;
    result.loss_trace.reserve(config.epochs);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const Eigen::MatrixXd pred = X * model.weights.transpose() +
                                     Eigen::VectorXd::Ones(s) * model.bias.transpose();
        double loss = 0.0;
        Eigen::MatrixXd G(s, o);
        for (Eigen::Index i = 0; i < s; ++i) {
            const Image p = unflatten(pred.row(i).transpose(), out_width, out_height);
            const Image g = unflatten(Y.row(i).transpose(), out_width, out_height);
            loss += compositeLoss(p, g, config.alpha, config.beta);
            G.row(i) = flatten(lossGradient(p, g, config.alpha, config.beta)).transpose();
        }
        loss /= static_cast<double>(s);
        if (!std::isfinite(loss)) {
            throw NonFiniteLoss("train_adam: non-finite loss at epoch " + std::to_string(epoch));
        }
        result.loss_trace.push_back(loss);

        const Eigen::MatrixXd gW = (G.transpose() * X) / static_cast<double>(s);
        const Eigen::VectorXd gB = G.colwise().mean().transpose();
        const double t = epoch + 1;
        const double corr1 = 1.0 - std::pow(config.adam_beta1, t);
        const double corr2 = 1.0 - std::pow(config.adam_beta2, t);
        mW = config.adam_beta1 * mW + (1.0 - config.adam_beta1) * gW;
        vW = config.adam_beta2 * vW + (1.0 - config.adam_beta2) * gW.cwiseProduct(gW);
        mB = config.adam_beta1 * mB + (1.0 - config.adam_beta1) * gB;
        vB = config.adam_beta2 * vB + (1.0 - config.adam_beta2) * gB.cwiseProduct(gB);
        model.weights -=
            config.lr *
            (mW / corr1).cwiseQuotient(((vW / corr2).cwiseSqrt().array() + config.adam_eps).matrix());
        model.bias -=
            config.lr *
            (mB / corr1).cwiseQuotient(((vB / corr2).cwiseSqrt().array() + config.adam_eps).matrix());
    }
    result.model = std::move(model);
    return result;
}

Image predict(const LinearReconstructor& model, const Eigen::VectorXd& feature, int out_width,
              int out_height) {
    if (feature.size() != model.weights.cols()) throw DimMismatch("predict: feature size mismatch");
    if (static_cast<Eigen::Index>(out_width) * out_height != model.weights.rows()) {
        throw DimMismatch("predict: output shape mismatch");
    }
    const Eigen::VectorXd y = model.weights * feature + model.bias;
    Image out = unflatten(y, out_width, out_height);
    out.clampUnit();
    return out;
}

Eigen::VectorXd flatten(const Image& img) {
    return Eigen::Map<const Eigen::VectorXd>(img.data.data(),
                                             static_cast<Eigen::Index>(img.data.size()));
}

Image unflatten(const Eigen::VectorXd& v, int width, int height) {
    if (v.size() != static_cast<Eigen::Index>(width) * height) {
        throw DimMismatch("unflatten: size mismatch");
    }
    Image img(width, height);
    std::memcpy(img.data.data(), v.data(), sizeof(double) * img.data.size());
    return img;
}

namespace {
constexpr char kModelMagic[4] = {'N', 'L', 'R', 'W'};
constexpr uint8_t kModelVersion = 1;
}  // namespace

void writeModelFile(const std::string& path, const LinearReconstructor& model) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    f.write(kModelMagic, 4);
    f.put(static_cast<char>(kModelVersion));
    auto putU16 = [&](uint16_t v) {
        f.put(static_cast<char>(v & 0xff));
        f.put(static_cast<char>((v >> 8) & 0xff));
    };
    putU16(static_cast<uint16_t>(model.in_dims));
    putU16(static_cast<uint16_t>(model.out_dims));
    auto putDouble = [&](double v) {
        static_assert(sizeof(double) == 8);
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        for (int i = 0; i < 8; ++i) f.put(static_cast<char>((bits >> (8 * i)) & 0xff));
    };
    for (int r = 0; r < model.out_dims; ++r)
        for (int c = 0; c < model.in_dims; ++c) putDouble(model.weights(r, c));
    for (int r = 0; r < model.out_dims; ++r) putDouble(model.bias(r));
    if (!f) throw IoError("short write: " + path);
}

LinearReconstructor readModelFile(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for read: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < 9) throw TruncatedRecord("model header truncated");
    if (std::memcmp(bytes.data(), kModelMagic, 4) != 0) throw BadMagic("not an NLRW model file");
    if (bytes[4] != kModelVersion) throw BadVersion("unsupported model version");
    LinearReconstructor model;
    model.in_dims = bytes[5] | (bytes[6] << 8);
    model.out_dims = bytes[7] | (bytes[8] << 8);
    const size_t nDoubles = static_cast<size_t>(model.in_dims) * model.out_dims + model.out_dims;
    if (bytes.size() != 9 + nDoubles * 8) throw TruncatedRecord("model payload size mismatch");
    auto getDouble = [&](size_t offset) {
        uint64_t bits = 0;
        for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[offset + i];
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    };
    model.weights.resize(model.out_dims, model.in_dims);
    size_t off = 9;
    for (int r = 0; r < model.out_dims; ++r)
        for (int c = 0; c < model.in_dims; ++c, off += 8) model.weights(r, c) = getDouble(off);
    model.bias.resize(model.out_dims);
    for (int r = 0; r < model.out_dims; ++r, off += 8) model.bias(r) = getDouble(off);
    return model;
}

}  // namespace nlos
