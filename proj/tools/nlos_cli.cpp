#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlos/digits.hpp"
#include "nlos/event_sim.hpp"
#include "nlos/features.hpp"
#include "nlos/forward_model.hpp"
#include "nlos/metrics.hpp"
#include "nlos/pipeline.hpp"
#include "nlos/reconstruct.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace nlos;

namespace {

struct GlobalOpts {
    uint64_t seed = 0;
    std::string config_path;
    std::string out = ".";
};

json loadConfigJson(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    json j;
    f >> j;
    return j;
}

SceneGeometry geometryFromConfig(const json& cfg) {
    SceneGeometry g;
    if (!cfg.contains("geometry")) return g;
    const json& j = cfg["geometry"];
    g.standoff_m = j.value("standoff_m", g.standoff_m);
    g.target_extent_m = j.value("target_extent_m", g.target_extent_m);
    g.target_res = j.value("target_res", g.target_res);
    g.wall_extent_m = j.value("wall_extent_m", g.wall_extent_m);
    g.wall_res = j.value("wall_res", g.wall_res);
    return g;
}

PipelineConfig pipelineFromConfig(const json& cfg) {
    PipelineConfig c;
    c.geometry = geometryFromConfig(cfg);
    if (cfg.contains("geometry")) {
        // explicit geometry block replaces the dataset default entirely
    } else if (cfg.contains("dataset_geometry")) {
        c.geometry = geometryFromConfig(json{{"geometry", cfg["dataset_geometry"]}});
    }
    if (cfg.contains("event_sim")) {
        const json& j = cfg["event_sim"];
        c.sim.contrast_threshold = j.value("contrast_threshold", c.sim.contrast_threshold);
        c.sim.log_floor = j.value("log_floor", c.sim.log_floor);
        c.sim.refractory_us = j.value("refractory_us", c.sim.refractory_us);
    }
    c.frame_rate_hz = cfg.value("frame_rate_hz", c.frame_rate_hz);
    c.feature_res = cfg.value("feature_res", c.feature_res);
    c.tau_us = cfg.value("tau_us", c.tau_us);
    return c;
}

TrainConfig trainFromConfig(const json& cfg, uint64_t seed) {
    TrainConfig t;
    if (cfg.contains("train")) {
        const json& j = cfg["train"];
        t.alpha = j.value("alpha", t.alpha);
        t.beta = j.value("beta", t.beta);
        t.lr = j.value("lr", t.lr);
        t.epochs = j.value("epochs", t.epochs);
        t.ridge_lambda = j.value("ridge_lambda", t.ridge_lambda);
        t.ridge_init = j.value("ridge_init", t.ridge_init);
    }
    t.seed = seed;
    return t;
}

Trajectory trajectoryFromFile(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open trajectory: " + path);
    json j;
    f >> j;
    Trajectory traj;
    for (const auto& knot : j) {
        traj.knots.push_back({knot.at("t_us").get<uint64_t>(),
                              {knot.at("dx_m").get<double>(), knot.at("dy_m").get<double>()}});
    }
    return traj;
}

std::vector<WallFrame> loadFrameSequence(const std::string& dir) {
    std::ifstream f(fs::path(dir) / "timestamps.json");
    if (!f) throw IoError("missing timestamp sidecar in " + dir);
    json ts;
    f >> ts;
    std::vector<WallFrame> frames;
    for (size_t k = 0; k < ts.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "wall_%04zu.pgm", k);
        WallFrame frame;
        frame.t_us = ts[k].get<uint64_t>();
        frame.image = readPgm16((fs::path(dir) / name).string());
        frames.push_back(std::move(frame));
    }
    return frames;
}

Modality parseModality(const std::string& s) {
    if (s == "event" || s == "E" || s == "e") return Modality::Event;
    if (s == "frame" || s == "F" || s == "f") return Modality::Frame;
    throw ParseError("unknown modality: " + s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic event-based non-line-of-sight imaging pipeline"};
    app.require_subcommand(1);
    GlobalOpts g;
    app.add_option("--seed", g.seed, "Deterministic seed");
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--out", g.out, "Output directory");

    // kernel
    auto* kernelCmd = app.add_subcommand("kernel", "Write the diffuse transport kernel as PGM");

    // render
    auto* renderCmd = app.add_subcommand("render", "Render a wall-frame video for a trajectory");
    std::string targetPath, trajPath;
    double fps = 100.0;
    renderCmd->add_option("--target", targetPath, "Target PGM (28x28)")->required();
    renderCmd->add_option("--trajectory", trajPath, "Trajectory JSON")->required();
    renderCmd->add_option("--fps", fps, "Frame rate");

    // simulate
    auto* simCmd = app.add_subcommand("simulate", "Convert a frame sequence to an event stream");
    std::string framesDir;
    simCmd->add_option("--frames", framesDir, "Directory of wall_*.pgm + timestamps.json")
        ->required();

    // featurize
    auto* featCmd = app.add_subcommand("featurize", "Voxel-grid time-surface features");
    std::string eventsPath;
    int nBins = 6;
    featCmd->add_option("--events", eventsPath, "NEVT1 event file")->required();
    featCmd->add_option("--bins", nBins, "Number of voxel-grid bins");

    // dataset gen
    auto* datasetCmd = app.add_subcommand("dataset", "Dataset operations");
    auto* genCmd = datasetCmd->add_subcommand("gen", "Generate a synthetic dataset");
    std::string sourceKind = "builtin";
    std::string idxImages, idxLabels, pgmDir;
    std::string profileName = "desk";
    int nPerDigit = 2, nPositions = 6;
    bool dryRun = false;
    genCmd->add_option("--source", sourceKind, "builtin | idx | pgmdir");
    genCmd->add_option("--idx-images", idxImages, "IDX image archive");
    genCmd->add_option("--idx-labels", idxLabels, "IDX label archive");
    genCmd->add_option("--pgm-dir", pgmDir, "PGM directory of 28x28 targets");
    genCmd->add_option("--profile", profileName, "desk | full | custom");
    genCmd->add_option("--per-digit", nPerDigit, "Variants per digit (custom profile)");
    genCmd->add_option("--positions", nPositions, "Positions per trajectory (custom profile)");
    genCmd->add_flag("--dry-run", dryRun, "Count samples without writing files");

    // train
    auto* trainCmd = app.add_subcommand("train", "Train the linear reconstructor");
    std::string manifestPath, modalityStr = "event", modelPrefix = "model";
    trainCmd->add_option("--manifest", manifestPath, "Dataset manifest")->required();
    trainCmd->add_option("--modality", modalityStr, "event | frame");
    trainCmd->add_option("--model", modelPrefix, "Output model prefix");

    // reconstruct
    auto* reconCmd = app.add_subcommand("reconstruct", "Apply a trained model to one feature");
    std::string modelPath, featurePath;
    reconCmd->add_option("--model", modelPath, "NLRW model file")->required();
    reconCmd->add_option("--feature", featurePath, "Feature PGM")->required();

    // eval
    auto* evalCmd = app.add_subcommand("eval", "Evaluate a model on a split");
    std::string evalManifest, evalModel, split = "test", evalModality = "event";
    evalCmd->add_option("--manifest", evalManifest, "Dataset manifest")->required();
    evalCmd->add_option("--model", evalModel, "NLRW model file")->required();
    evalCmd->add_option("--split", split, "train | val | test");
    evalCmd->add_option("--modality", evalModality, "event | frame");

    // compare-ef
    auto* compareCmd = app.add_subcommand("compare-ef", "Train and compare E vs F pipelines");
    std::string cmpManifest;
    compareCmd->add_option("--manifest", cmpManifest, "Dataset manifest")->required();

    // report
    auto* reportCmd = app.add_subcommand("report", "Manifest counts and data-volume summary");
    std::string repManifest;
    reportCmd->add_option("--manifest", repManifest, "Dataset manifest")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const json cfg = loadConfigJson(g.config_path);
        fs::create_directories(g.out);

        if (kernelCmd->parsed()) {
            SceneGeometry geom = geometryFromConfig(cfg);
            const Image k = diffuseKernel(geom);
            const double scale = k.maxValue();
            writePgm16((fs::path(g.out) / "kernel.pgm").string(), k, scale);
            json meta = {{"scale", scale}, {"center_value", k.at(geom.wall_res / 2, geom.wall_res / 2)}};
            std::ofstream f(fs::path(g.out) / "kernel.json");
            f << meta.dump(2) << "\n";
            std::cout << "kernel written, center value " << meta["center_value"] << "\n";
        } else if (renderCmd->parsed()) {
            SceneGeometry geom = geometryFromConfig(cfg);
            const Image target = readPgm16(targetPath);
            const Trajectory traj = trajectoryFromFile(trajPath);
            const auto frames = renderVideo(target, traj, fps, geom);
            double scale = 0.0;
            for (const auto& fr : frames) scale = std::max(scale, fr.image.maxValue());
            if (scale <= 0.0) scale = 1.0;
            json ts = json::array();
            for (size_t k = 0; k < frames.size(); ++k) {
                char name[32];
                std::snprintf(name, sizeof(name), "wall_%04zu.pgm", k);
                writePgm16((fs::path(g.out) / name).string(), frames[k].image, scale);
                ts.push_back(frames[k].t_us);
            }
            std::ofstream f(fs::path(g.out) / "timestamps.json");
            f << ts.dump() << "\n";
            std::ofstream sf(fs::path(g.out) / "scale.json");
            sf << json{{"wall_scale", scale}}.dump() << "\n";
            std::cout << frames.size() << " frames rendered\n";
        } else if (simCmd->parsed()) {
            PipelineConfig pc = pipelineFromConfig(cfg);
            const auto frames = loadFrameSequence(framesDir);
            const EventStream ev = simulateEvents(frames, pc.sim);
            writeBinaryFile((fs::path(g.out) / "events.nevt").string(), ev);
            const double dur =
                (frames.back().t_us - frames.front().t_us) * 1e-6;
            const auto rate = eventRateReport(ev, std::max(dur, 1e-9));
            std::cout << rate.total << " events (" << rate.on_count << " on, " << rate.off_count
                      << " off), " << rate.events_per_second << " ev/s\n";
        } else if (featCmd->parsed()) {
            PipelineConfig pc = pipelineFromConfig(cfg);
            const EventStream ev = readBinaryFile(eventsPath);
            const uint64_t span =
                ev.events.empty() ? 0 : ev.events.back().t_us - ev.events.front().t_us;
            TimeSurfaceConfig ts;
            ts.polarity_mode = pc.polarity_mode;
            ts.tau_us = pc.tau_us > 0.0
                            ? pc.tau_us
                            : std::max(1.0, 3.0 * static_cast<double>(span) / nBins);
            const auto feats = voxelGridFeatures(ev, nBins, ts);
            for (size_t k = 0; k < feats.size(); ++k) {
                char name[32];
                std::snprintf(name, sizeof(name), "feature_%02zu.pgm", k);
                writePgm16((fs::path(g.out) / name).string(), feats[k].channels[0]);
            }
            std::cout << feats.size() << " feature frames (tau " << ts.tau_us << " us)\n";
        } else if (genCmd->parsed()) {
            TargetSourceSpec source;
            if (sourceKind == "builtin") {
                source.kind = TargetSourceSpec::Kind::Builtin;
            } else if (sourceKind == "idx") {
                source.kind = TargetSourceSpec::Kind::IdxUbyte;
                source.images_path = idxImages;
                source.labels_path = idxLabels;
            } else if (sourceKind == "pgmdir") {
                source.kind = TargetSourceSpec::Kind::PgmDirectory;
                source.images_path = pgmDir;
            } else {
                throw ParseError("unknown source kind: " + sourceKind);
            }
            DatasetProfile profile;
            if (profileName == "full") {
                profile.full_scale = true;
            } else if (profileName == "custom") {
                profile.n_per_digit = nPerDigit;
                profile.n_positions = nPositions;
            } else if (profileName != "desk") {
                throw ParseError("unknown profile: " + profileName);
            }
            const PipelineConfig pc = pipelineFromConfig(cfg);
            const auto manifest = generateDataset(source, profile, pc, g.seed, g.out, dryRun);
            json counts = json::object();
            for (const auto& [name, samples] : manifest.splits) {
                counts[name] = samples.size();
            }
            std::cout << "split counts: " << counts.dump() << "\n";
            if (!dryRun) std::cout << "manifest: " << (fs::path(g.out) / "manifest.json") << "\n";
        } else if (trainCmd->parsed()) {
            const auto manifest = readManifestFile(manifestPath);
            const std::string root = fs::path(manifestPath).parent_path().string();
            const Modality m = parseModality(modalityStr);
            const TrainConfig tc = trainFromConfig(cfg, g.seed);
            const TrainResult result = runTraining(manifest, root, m, tc);
            saveModel((fs::path(g.out) / modelPrefix).string(), result, tc, m);
            std::cout << "final loss " << (result.loss_trace.empty() ? 0.0 : result.loss_trace.back())
                      << " after " << result.loss_trace.size() << " epochs\n";
        } else if (reconCmd->parsed()) {
            const LinearReconstructor model = readModelFile(modelPath);
            const Image feat = readPgm16(featurePath);
            const int res = static_cast<int>(std::lround(std::sqrt(double(model.out_dims))));
            const Image recon = predict(model, flatten(feat), res, res);
            writePgm16((fs::path(g.out) / "reconstruction.pgm").string(), recon);
            std::cout << "reconstruction written\n";
        } else if (evalCmd->parsed()) {
            const auto manifest = readManifestFile(evalManifest);
            const std::string root = fs::path(evalManifest).parent_path().string();
            const LinearReconstructor model = readModelFile(evalModel);
            const auto report =
                runEval(manifest, root, model, split, parseModality(evalModality), g.out);
            std::cout << "n=" << report.overall.n << " mean PSNR " << report.overall.mean_psnr
                      << " dB, mean SSIM " << report.overall.mean_ssim << ", mean Cd dev "
                      << report.overall.mean_cd_dev << " px (" << report.overall.cd_excluded
                      << " excluded)\n";
        } else if (compareCmd->parsed()) {
            const auto manifest = readManifestFile(cmpManifest);
            const std::string root = fs::path(cmpManifest).parent_path().string();
            const TrainConfig tc = trainFromConfig(cfg, g.seed);
            const auto report = runCompareEf(manifest, root, tc, g.out);
            std::cout << "E: PSNR " << report.event_eval.overall.mean_psnr << " dB | F: PSNR "
                      << report.frame_eval.overall.mean_psnr << " dB | " << report.volume.summary
                      << "\n";
        } else if (reportCmd->parsed()) {
            const auto manifest = readManifestFile(repManifest);
            json counts = json::object();
            for (const auto& [name, samples] : manifest.splits) counts[name] = samples.size();
            json j = {{"split_counts", counts},
                      {"byte_totals",
                       {{"events", manifest.byte_totals.events},
                        {"frames", manifest.byte_totals.frames},
                        {"features", manifest.byte_totals.features}}}};
            if (manifest.byte_totals.frames > 0) {
                const auto vol =
                    dataVolumeReport(manifest.byte_totals.events, manifest.byte_totals.frames);
                j["data_volume_ratio"] = vol.ratio;
                j["data_volume_summary"] = vol.summary;
            }
            std::cout << j.dump(2) << "\n";
        }
    } catch (const std::exception& e) {
        json err = {{"error", std::string(e.what())}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
