#include "nlos/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "nlos/digits.hpp"

namespace nlos {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string modalityName(Modality m) {
    return m == Modality::Event ? "event" : "frame";
}

// ---------------------------------------------------------------------------
// JSON serialization

namespace {

json toJson(const SceneGeometry& g) {
    return {{"standoff_m", g.standoff_m},
            {"target_extent_m", g.target_extent_m},
            {"target_res", g.target_res},
            {"wall_extent_m", g.wall_extent_m},
            {"wall_res", g.wall_res}};
}

SceneGeometry geometryFromJson(const json& j) {
    SceneGeometry g;
    g.standoff_m = j.at("standoff_m");
    g.target_extent_m = j.at("target_extent_m");
    g.target_res = j.at("target_res");
    g.wall_extent_m = j.at("wall_extent_m");
    g.wall_res = j.at("wall_res");
    return g;
}

json toJson(const EventSimConfig& c) {
    return {{"contrast_threshold", c.contrast_threshold},
            {"log_floor", c.log_floor},
            {"refractory_us", c.refractory_us},
            {"threshold_jitter", c.threshold_jitter},
            {"jitter_sigma", c.jitter_sigma},
            {"jitter_seed", c.jitter_seed}};
}

EventSimConfig simFromJson(const json& j) {
    EventSimConfig c;
    c.contrast_threshold = j.at("contrast_threshold");
    c.log_floor = j.at("log_floor");
    c.refractory_us = j.at("refractory_us");
    c.threshold_jitter = j.at("threshold_jitter");
    c.jitter_sigma = j.at("jitter_sigma");
    c.jitter_seed = j.at("jitter_seed");
    return c;
}

json toJson(const DatasetProfile& p) {
    return {{"n_per_digit", p.n_per_digit},
            {"n_positions", p.n_positions},
            {"pose_span_m", p.pose_span_m},
            {"seconds_per_position", p.seconds_per_position},
            {"full_scale", p.full_scale}};
}

DatasetProfile profileFromJson(const json& j) {
    DatasetProfile p;
    p.n_per_digit = j.at("n_per_digit");
    p.n_positions = j.at("n_positions");
    p.pose_span_m = j.at("pose_span_m");
    p.seconds_per_position = j.at("seconds_per_position");
    p.full_scale = j.at("full_scale");
    return p;
}

json toJson(const PipelineConfig& c) {
    return {{"geometry", toJson(c.geometry)},
            {"event_sim", toJson(c.sim)},
            {"frame_rate_hz", c.frame_rate_hz},
            {"feature_res", c.feature_res},
            {"tau_us", c.tau_us},
            {"polarity_mode",
             c.polarity_mode == PolarityMode::MergedMax ? "merged_max" : "separate_channels"}};
}

PipelineConfig pipelineConfigFromJson(const json& j) {
    PipelineConfig c;
    c.geometry = geometryFromJson(j.at("geometry"));
    c.sim = simFromJson(j.at("event_sim"));
    c.frame_rate_hz = j.at("frame_rate_hz");
    c.feature_res = j.at("feature_res");
    c.tau_us = j.at("tau_us");
    c.polarity_mode = j.at("polarity_mode") == "merged_max" ? PolarityMode::MergedMax
                                                            : PolarityMode::SeparateChannels;
    return c;
}

json toJson(const SampleRecord& s) {
    return {{"id", s.id},
            {"digit", s.digit},
            {"variant", s.variant},
            {"bin", s.bin},
            {"pose", {s.pose_dx_m, s.pose_dy_m}},
            {"t_us", s.t_us},
            {"paths",
             {{"gt", s.gt_path},
              {"feature", s.feature_path},
              {"frame", s.frame_path},
              {"events", s.events_path}}}};
}

SampleRecord sampleFromJson(const json& j) {
    SampleRecord s;
    s.id = j.at("id");
    s.digit = j.at("digit");
    s.variant = j.at("variant");
    s.bin = j.at("bin");
    s.pose_dx_m = j.at("pose")[0];
    s.pose_dy_m = j.at("pose")[1];
    s.t_us = j.at("t_us");
    const auto& p = j.at("paths");
    s.gt_path = p.at("gt");
    s.feature_path = p.at("feature");
    s.frame_path = p.at("frame");
    s.events_path = p.at("events");
    return s;
}

}  // namespace

void writeManifestFile(const std::string& path, const DatasetManifest& m) {
    json j;
    j["format"] = "nlos-manifest-v1";
    j["seed"] = m.seed;
    j["source_kind"] = m.source_kind;
    j["profile"] = toJson(m.profile);
    j["config"] = toJson(m.config);
    json splits = json::object();
    for (const auto& [name, samples] : m.splits) {
        json arr = json::array();
        for (const auto& s : samples) arr.push_back(toJson(s));
        splits[name] = arr;
    }
    j["splits"] = splits;
    json seqs = json::object();
    for (const auto& [id, info] : m.sequences) {
        seqs[id] = {{"wall_scale", info.wall_scale}, {"tau_us", info.tau_us}};
    }
    j["sequences"] = seqs;
    j["byte_totals"] = {{"events", m.byte_totals.events},
                        {"frames", m.byte_totals.frames},
                        {"features", m.byte_totals.features}};
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for write: " + path);
    f << j.dump(2) << "\n";
}

DatasetManifest readManifestFile(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for read: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ParseError("manifest parse error: " + std::string(e.what()));
    }
    if (j.value("format", "") != "nlos-manifest-v1") throw BadVersion("unknown manifest format");
    DatasetManifest m;
    m.seed = j.at("seed");
    m.source_kind = j.at("source_kind");
    m.profile = profileFromJson(j.at("profile"));
    m.config = pipelineConfigFromJson(j.at("config"));
    for (const auto& [name, arr] : j.at("splits").items()) {
        std::vector<SampleRecord> samples;
        for (const auto& s : arr) samples.push_back(sampleFromJson(s));
        m.splits[name] = std::move(samples);
    }
    for (const auto& [id, info] : j.at("sequences").items()) {
        m.sequences[id] = SequenceInfo{info.at("wall_scale"), info.at("tau_us")};
    }
    m.byte_totals.events = j.at("byte_totals").at("events");
    m.byte_totals.frames = j.at("byte_totals").at("frames");
    m.byte_totals.features = j.at("byte_totals").at("features");
    return m;
}

// ---------------------------------------------------------------------------
// Target sources

namespace {

uint32_t readBigEndianU32(std::istream& f, const std::string& path) {
    uint8_t b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw TruncatedRecord("IDX header truncated: " + path);
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | b[3];
}

}  // namespace

std::vector<std::pair<int, Image>> loadIdxDigits(const std::string& images_path,
                                                 const std::string& labels_path) {
    std::ifstream fi(images_path, std::ios::binary);
    if (!fi) throw IoError("cannot open IDX images: " + images_path);
    if (readBigEndianU32(fi, images_path) != 0x00000803u) {
        throw BadMagic("IDX image magic mismatch: " + images_path);
    }
    const uint32_t n = readBigEndianU32(fi, images_path);
    const uint32_t rows = readBigEndianU32(fi, images_path);
    const uint32_t cols = readBigEndianU32(fi, images_path);
    if (rows != 28 || cols != 28) throw DimMismatch("IDX images must be 28x28");

    std::ifstream fl(labels_path, std::ios::binary);
    if (!fl) throw IoError("cannot open IDX labels: " + labels_path);
    if (readBigEndianU32(fl, labels_path) != 0x00000801u) {
        throw BadMagic("IDX label magic mismatch: " + labels_path);
    }
    const uint32_t nl = readBigEndianU32(fl, labels_path);
    if (nl != n) throw CountMismatch("IDX image/label count mismatch");

    std::vector<std::pair<int, Image>> out;
    out.reserve(n);
    std::vector<uint8_t> buf(28 * 28);
    for (uint32_t i = 0; i < n; ++i) {
        fi.read(reinterpret_cast<char*>(buf.data()), 28 * 28);
        const int label = fl.get();
        if (!fi || label == EOF) throw TruncatedRecord("IDX payload truncated");
        Image img(28, 28);
        for (size_t p = 0; p < buf.size(); ++p) img.data[p] = buf[p] / 255.0;
        out.emplace_back(label, std::move(img));
    }
    return out;
}

namespace {

/// targets[digit][variant]
std::vector<std::vector<Image>> loadTargets(const TargetSourceSpec& source, int variantsNeeded,
                                            uint64_t seed) {
    std::vector<std::vector<Image>> targets(10);
    switch (source.kind) {
        case TargetSourceSpec::Kind::Builtin: {
            for (int d = 0; d < 10; ++d)
                for (int v = 0; v < variantsNeeded; ++v) targets[d].push_back(builtinDigit(d, v));
            break;
        }
        case TargetSourceSpec::Kind::IdxUbyte: {
            auto all = loadIdxDigits(source.images_path, source.labels_path);
            std::vector<std::vector<size_t>> byDigit(10);
            for (size_t i = 0; i < all.size(); ++i) {
                if (all[i].first >= 0 && all[i].first <= 9) byDigit[all[i].first].push_back(i);
            }
            std::mt19937_64 rng(seed);
            for (int d = 0; d < 10; ++d) {
                if (static_cast<int>(byDigit[d].size()) < variantsNeeded) {
                    throw CountMismatch("IDX archive has too few images of digit " +
                                        std::to_string(d));
                }
                std::shuffle(byDigit[d].begin(), byDigit[d].end(), rng);
                for (int v = 0; v < variantsNeeded; ++v)
                    targets[d].push_back(all[byDigit[d][v]].second);
            }
            break;
        }
        case TargetSourceSpec::Kind::PgmDirectory: {
            std::vector<std::vector<std::string>> byDigit(10);
            for (const auto& entry : fs::directory_iterator(source.images_path)) {
                const std::string name = entry.path().filename().string();
                if (entry.path().extension() != ".pgm" || name.empty() || !std::isdigit(name[0]))
                    continue;
                byDigit[name[0] - '0'].push_back(entry.path().string());
            }
            for (int d = 0; d < 10; ++d) {
                std::sort(byDigit[d].begin(), byDigit[d].end());
                if (static_cast<int>(byDigit[d].size()) < variantsNeeded) {
                    throw CountMismatch("PGM directory has too few images of digit " +
                                        std::to_string(d));
                }
                for (int v = 0; v < variantsNeeded; ++v) {
                    Image img = readPgm16(byDigit[d][v]);
                    if (img.width != 28 || img.height != 28) {
                        throw DimMismatch("target PGM must be 28x28: " + byDigit[d][v]);
                    }
                    targets[d].push_back(std::move(img));
                }
            }
            break;
        }
    }
    return targets;
}

std::string sourceKindName(TargetSourceSpec::Kind k) {
    switch (k) {
        case TargetSourceSpec::Kind::Builtin: return "builtin";
        case TargetSourceSpec::Kind::IdxUbyte: return "idx_ubyte";
        case TargetSourceSpec::Kind::PgmDirectory: return "pgm_directory";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Dataset generation

struct TrajectoryJob {
    std::string split;
    int digit = 0;
    int variant = 0;
    int n_bins = 1;
    double offset_m = 0.0;
};

std::vector<TrajectoryJob> buildJobs(const DatasetProfile& p) {
    std::vector<TrajectoryJob> jobs;
    const double step = p.pose_span_m / std::max(1, p.n_positions);
    if (p.full_scale) {
        // Mirrors the full-scale split arithmetic: 3950 train, 130 val,
        // 210 test samples over 130 train-side targets (13 variants per
        // digit) and 20 test-side targets.
        for (int ti = 0; ti < 130; ++ti) {
            jobs.push_back({"train", ti % 10, ti / 10, ti < 50 ? 31 : 30, 0.0});
        }
        for (int ti = 0; ti < 130; ++ti) {
            jobs.push_back({"val", ti % 10, ti / 10, 1, step / 4.0});
        }
        for (int d = 0; d < 10; ++d) jobs.push_back({"test", d, 0, 11, step / 2.0});
        for (int d = 0; d < 10; ++d) jobs.push_back({"test", d, 1, 10, step / 2.0});
        return jobs;
    }
    for (int d = 0; d < 10; ++d)
        for (int v = 0; v < p.n_per_digit; ++v)
            jobs.push_back({"train", d, v, p.n_positions, 0.0});
    for (int d = 0; d < 10; ++d) jobs.push_back({"val", d, 0, 1, step / 4.0});
    for (int d = 0; d < 10; ++d)
        for (int v = 0; v < p.n_per_digit; ++v)
            jobs.push_back({"test", d, v, p.n_positions, step / 2.0});
    return jobs;
}

std::string jobId(const TrajectoryJob& job) {
    return job.split + "/d" + std::to_string(job.digit) + "_v" + std::to_string(job.variant);
}

struct TrajectoryOutput {
    std::vector<SampleRecord> samples;
    SequenceInfo info;
    uint64_t event_bytes = 0;
    uint64_t frame_bytes = 0;
    uint64_t feature_bytes = 0;
};

TrajectoryOutput processTrajectory(const TrajectoryJob& job, const Image& target,
                                   const DatasetProfile& profile, const PipelineConfig& config,
                                   const std::string& out_dir) {
    const std::string id = jobId(job);
    const fs::path dir = fs::path(out_dir) / id;
    fs::create_directories(dir);

    Trajectory traj;
    const double half = profile.pose_span_m / 2.0;
    const uint64_t duration_us = static_cast<uint64_t>(
        std::llround(job.n_bins * profile.seconds_per_position * 1e6));
    traj.knots = {{0, {job.offset_m - half, 0.0}}, {duration_us, {job.offset_m + half, 0.0}}};

    auto frames = renderVideo(target, traj, config.frame_rate_hz, config.geometry);

    double scale = 0.0;
    for (const auto& f : frames) scale = std::max(scale, f.image.maxValue());
    if (scale <= 0.0) scale = 1.0;
    std::vector<WallFrame> normalized = frames;
    for (auto& f : normalized)
        for (double& v : f.image.data) v /= scale;

    TrajectoryOutput out;
    out.info.wall_scale = scale;

    json timestamps = json::array();
    for (size_t k = 0; k < normalized.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "wall_%04zu.pgm", k);
        const fs::path p = dir / name;
        writePgm16(p.string(), normalized[k].image);
        out.frame_bytes += fs::file_size(p);
        timestamps.push_back(normalized[k].t_us);
    }
    {
        std::ofstream f(dir / "timestamps.json");
        f << timestamps.dump() << "\n";
    }

    EventStream events = simulateEvents(normalized, config.sim);
    if (events.events.empty()) {
        throw EmptyStream(id + ": simulation produced no events");
    }
    const fs::path evPath = dir / "events.nevt";
    writeBinaryFile(evPath.string(), events);
    out.event_bytes = fs::file_size(evPath);

    const uint64_t span = events.events.back().t_us - events.events.front().t_us;
    TimeSurfaceConfig ts;
    ts.polarity_mode = config.polarity_mode;
    // Default decay spans three bins: long enough that the surface stays
    // dense and varies smoothly with emitter position.
    ts.tau_us = config.tau_us > 0.0
                    ? config.tau_us
                    : std::max(1.0, 3.0 * static_cast<double>(span) / job.n_bins);
    out.info.tau_us = ts.tau_us;
    auto features = voxelGridFeatures(events, job.n_bins, ts);

    const double tp = config.geometry.targetPitch();
    for (int k = 0; k < job.n_bins; ++k) {
        const uint64_t binEnd = features[k].bin_end_us;
        const Pose pose = traj.poseAt(binEnd);

        SampleRecord s;
        char bin[16];
        std::snprintf(bin, sizeof(bin), "b%02d", k);
        s.id = id + "/" + bin;
        s.digit = job.digit;
        s.variant = job.variant;
        s.bin = k;
        s.pose_dx_m = pose.dx_m;
        s.pose_dy_m = pose.dy_m;
        s.t_us = binEnd;

        const Image gt = shiftImage(target, static_cast<int>(std::lround(pose.dx_m / tp)),
                                    static_cast<int>(std::lround(pose.dy_m / tp)));
        const fs::path gtPath = dir / (std::string("gt_") + bin + ".pgm");
        writePgm16(gtPath.string(), gt);
        s.gt_path = fs::relative(gtPath, out_dir).string();

        // E-mode input: merged time surface downsampled to the model grid.
        Image feat = features[k].channels[0];
        if (config.polarity_mode == PolarityMode::SeparateChannels) {
            for (size_t i = 0; i < feat.data.size(); ++i) {
                feat.data[i] = std::max(feat.data[i], features[k].channels[1].data[i]);
            }
        }
        feat = areaResample(feat, config.feature_res, config.feature_res);
        const fs::path featPath = dir / (std::string("feature_") + bin + ".pgm");
        writePgm16(featPath.string(), feat);
        s.feature_path = fs::relative(featPath, out_dir).string();
        out.feature_bytes += fs::file_size(featPath);

        // F-mode input: last wall frame at or before the bin end.
        size_t fi = 0;
        for (size_t i = 0; i < normalized.size(); ++i) {
            if (normalized[i].t_us <= binEnd) fi = i;
        }
        const Image fimg =
            areaResample(normalized[fi].image, config.feature_res, config.feature_res);
        const fs::path framePath = dir / (std::string("frame_") + bin + ".pgm");
        writePgm16(framePath.string(), fimg);
        s.frame_path = fs::relative(framePath, out_dir).string();

        s.events_path = fs::relative(evPath, out_dir).string();
        out.samples.push_back(std::move(s));
    }
    return out;
}

}  // namespace

DatasetManifest generateDataset(const TargetSourceSpec& source, const DatasetProfile& profile,
                                const PipelineConfig& config, uint64_t seed,
                                const std::string& out_dir, bool dry_run) {
    if (profile.n_per_digit < 1 || profile.n_positions < 1 || profile.pose_span_m <= 0.0 ||
        profile.seconds_per_position <= 0.0) {
        throw DimMismatch("generate_dataset: profile fields must be positive");
    }
    DatasetManifest manifest;
    manifest.seed = seed;
    manifest.source_kind = sourceKindName(source.kind);
    manifest.profile = profile;
    manifest.config = config;
    manifest.splits = {{"train", {}}, {"val", {}}, {"test", {}}};

    const auto jobs = buildJobs(profile);
    if (dry_run) {
        for (const auto& job : jobs) {
            for (int k = 0; k < job.n_bins; ++k) {
                SampleRecord s;
                s.id = jobId(job) + "/b" + std::to_string(k);
                s.digit = job.digit;
                s.variant = job.variant;
                s.bin = k;
                manifest.splits[job.split].push_back(std::move(s));
            }
        }
        return manifest;
    }

    int variantsNeeded = 1;
    for (const auto& job : jobs) variantsNeeded = std::max(variantsNeeded, job.variant + 1);
    const auto targets = loadTargets(source, variantsNeeded, seed);

    fs::create_directories(out_dir);
    for (const auto& job : jobs) {
        try {
            auto out = processTrajectory(job, targets[job.digit][job.variant], profile, config,
                                         out_dir);
            auto& split = manifest.splits[job.split];
            split.insert(split.end(), out.samples.begin(), out.samples.end());
            manifest.sequences[jobId(job)] = out.info;
            manifest.byte_totals.events += out.event_bytes;
            manifest.byte_totals.frames += out.frame_bytes;
            manifest.byte_totals.features += out.feature_bytes;
        } catch (const Error& e) {
            throw Error(jobId(job) + ": " + e.what());
        }
    }
    writeManifestFile((fs::path(out_dir) / "manifest.json").string(), manifest);
    return manifest;
}

void validateManifest(const DatasetManifest& manifest, const std::string& root_dir) {
    std::map<std::string, bool> checkedEvents;
    std::map<std::string, bool> seenIds;
    for (const auto& [split, samples] : manifest.splits) {
        for (const auto& s : samples) {
            if (seenIds.count(s.id)) throw CountMismatch("duplicate sample id: " + s.id);
            seenIds[s.id] = true;
            const Image gt = readPgm16((fs::path(root_dir) / s.gt_path).string());
            if (gt.width != manifest.config.geometry.target_res) {
                throw DimMismatch(s.id + ": ground-truth size mismatch");
            }
            const Image feat = readPgm16((fs::path(root_dir) / s.feature_path).string());
            const Image frame = readPgm16((fs::path(root_dir) / s.frame_path).string());
            if (feat.width != manifest.config.feature_res ||
                frame.width != manifest.config.feature_res) {
                throw DimMismatch(s.id + ": input size mismatch");
            }
            if (!checkedEvents.count(s.events_path)) {
                const EventStream ev =
                    readBinaryFile((fs::path(root_dir) / s.events_path).string());
                if (auto v = validate(ev)) {
                    throw ParseError(s.events_path + ": invalid stream: " + v->message);
                }
                checkedEvents[s.events_path] = true;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Training and evaluation

namespace {

std::vector<TrainSample> loadSplit(const DatasetManifest& manifest, const std::string& root_dir,
                                   const std::string& split, Modality modality) {
    auto it = manifest.splits.find(split);
    if (it == manifest.splits.end() || it->second.empty()) {
        throw EmptyStream("split '" + split + "' is empty");
    }
    std::vector<TrainSample> samples;
    samples.reserve(it->second.size());
    for (const auto& s : it->second) {
        const std::string& inputPath =
            modality == Modality::Event ? s.feature_path : s.frame_path;
        TrainSample ts;
        ts.feature = flatten(readPgm16((fs::path(root_dir) / inputPath).string()));
        ts.target = flatten(readPgm16((fs::path(root_dir) / s.gt_path).string()));
        samples.push_back(std::move(ts));
    }
    return samples;
}

}  // namespace

TrainResult runTraining(const DatasetManifest& manifest, const std::string& root_dir,
                        Modality modality, const TrainConfig& config) {
    const auto samples = loadSplit(manifest, root_dir, "train", modality);
    const int res = manifest.config.geometry.target_res;
    return trainAdam(samples, config, res, res);
}

void saveModel(const std::string& prefix, const TrainResult& result, const TrainConfig& config,
               Modality modality) {
    writeModelFile(prefix + ".nlrw", result.model);
    json j;
    j["modality"] = modalityName(modality);
    j["train_config"] = {{"alpha", config.alpha},
                         {"beta", config.beta},
                         {"lr", config.lr},
                         {"adam_beta1", config.adam_beta1},
                         {"adam_beta2", config.adam_beta2},
                         {"adam_eps", config.adam_eps},
                         {"epochs", config.epochs},
                         {"ridge_lambda", config.ridge_lambda},
                         {"seed", config.seed},
                         {"ridge_init", config.ridge_init}};
    j["loss_trace"] = result.loss_trace;
    std::ofstream f(prefix + ".json");
    if (!f) throw IoError("cannot open for write: " + prefix + ".json");
    f << j.dump(2) << "\n";
}

namespace {

void finishAggregate(DigitAggregate& a, double psnrSum, double ssimSum, double cdSum, int cdN) {
    const int psnrN = a.n - a.psnr_inf;
    a.mean_psnr = psnrN > 0 ? psnrSum / psnrN : 0.0;
    a.mean_ssim = a.n > 0 ? ssimSum / a.n : 0.0;
    a.mean_cd_dev = cdN > 0 ? cdSum / cdN : 0.0;
}

json aggregateToJson(const DigitAggregate& a) {
    return {{"n", a.n},
            {"mean_psnr", a.mean_psnr},
            {"mean_ssim", a.mean_ssim},
            {"mean_cd_dev", a.mean_cd_dev},
            {"cd_excluded", a.cd_excluded},
            {"psnr_inf", a.psnr_inf},
            {"lpips", "not available"}};
}

}  // namespace

EvalReport runEval(const DatasetManifest& manifest, const std::string& root_dir,
                   const LinearReconstructor& model, const std::string& split,
                   Modality modality, const std::string& out_dir) {
    auto it = manifest.splits.find(split);
    if (it == manifest.splits.end() || it->second.empty()) {
        throw EmptyStream("split '" + split + "' is empty");
    }
    fs::create_directories(out_dir);
    const int res = manifest.config.geometry.target_res;
    const SsimConfig evalSsim{SsimWindow::Gaussian11x11};
    const CdConfig cd;

    std::ofstream csv(fs::path(out_dir) /
                      ("eval_" + split + "_" + modalityName(modality) + ".csv"));
    csv << "id,digit,variant,psnr,ssim,cd_recon,cd_gt,cd_dev,no_foreground\n";

    struct Acc {
        DigitAggregate agg;
        double psnrSum = 0.0, ssimSum = 0.0, cdSum = 0.0;
        int cdN = 0;
    };
    Acc overall;
    std::map<int, Acc> perDigit;

    for (const auto& s : it->second) {
        const std::string& inputPath =
            modality == Modality::Event ? s.feature_path : s.frame_path;
        const Eigen::VectorXd x = flatten(readPgm16((fs::path(root_dir) / inputPath).string()));
        const Image gt = readPgm16((fs::path(root_dir) / s.gt_path).string());
        const Image recon = predict(model, x, res, res);

        const fs::path reconPath = fs::path(out_dir) / (modalityName(modality) + "_recon") /
                                   (s.id + ".pgm");
        fs::create_directories(reconPath.parent_path());
        writePgm16(reconPath.string(), recon);

        const double p = psnr(recon, gt, 1.0);
        const double sv = ssim(recon, gt, evalSsim);
        bool noFg = false;
        double cdRecon = 0.0, cdGt = 0.0, cdDev = 0.0;
        try {
            cdRecon = contourDistance(recon, cd);
            cdGt = contourDistance(gt, cd);
            cdDev = std::abs(cdRecon - cdGt);
        } catch (const NoForeground&) {
            noFg = true;
        }

        csv << s.id << ',' << s.digit << ',' << s.variant << ',' << p << ',' << sv << ','
            << (noFg ? "" : std::to_string(cdRecon)) << ','
            << (noFg ? "" : std::to_string(cdGt)) << ','
            << (noFg ? "" : std::to_string(cdDev)) << ',' << (noFg ? 1 : 0) << '\n';

        for (Acc* acc : {&overall, &perDigit[s.digit]}) {
            acc->agg.n += 1;
            if (std::isinf(p)) {
                acc->agg.psnr_inf += 1;
            } else {
                acc->psnrSum += p;
            }
            acc->ssimSum += sv;
            if (noFg) {
                acc->agg.cd_excluded += 1;
            } else {
                acc->cdSum += cdDev;
                acc->cdN += 1;
            }
        }
    }

    EvalReport report;
    finishAggregate(overall.agg, overall.psnrSum, overall.ssimSum, overall.cdSum, overall.cdN);
    report.overall = overall.agg;
    json perDigitJson = json::object();
    for (auto& [d, acc] : perDigit) {
        finishAggregate(acc.agg, acc.psnrSum, acc.ssimSum, acc.cdSum, acc.cdN);
        report.per_digit[d] = acc.agg;
        perDigitJson[std::to_string(d)] = aggregateToJson(acc.agg);
    }
    json summary = {{"split", split},
                    {"modality", modalityName(modality)},
                    {"overall", aggregateToJson(report.overall)},
                    {"per_digit", perDigitJson}};
    std::ofstream jf(fs::path(out_dir) /
                     ("eval_" + split + "_" + modalityName(modality) + "_summary.json"));
    jf << summary.dump(2) << "\n";
    return report;
}

CompareReport runCompareEf(const DatasetManifest& manifest, const std::string& root_dir,
                           const TrainConfig& config, const std::string& out_dir) {
    fs::create_directories(out_dir);
    CompareReport report;
    for (Modality m : {Modality::Event, Modality::Frame}) {
        const TrainResult result = runTraining(manifest, root_dir, m, config);
        saveModel((fs::path(out_dir) / ("model_" + modalityName(m))).string(), result, config, m);
        const EvalReport eval = runEval(manifest, root_dir, result.model, "test", m, out_dir);
        (m == Modality::Event ? report.event_eval : report.frame_eval) = eval;
    }
    report.volume = dataVolumeReport(manifest.byte_totals.events, manifest.byte_totals.frames);

    json perDigit = json::object();
    for (const auto& [d, agg] : report.event_eval.per_digit) {
        json row;
        row["event"] = aggregateToJson(agg);
        auto fIt = report.frame_eval.per_digit.find(d);
        if (fIt != report.frame_eval.per_digit.end()) row["frame"] = aggregateToJson(fIt->second);
        perDigit[std::to_string(d)] = row;
    }
    json j = {{"event_overall", aggregateToJson(report.event_eval.overall)},
              {"frame_overall", aggregateToJson(report.frame_eval.overall)},
              {"per_digit", perDigit},
              {"data_volume",
               {{"event_bytes", report.volume.event_bytes},
                {"frame_bytes", report.volume.frame_bytes},
                {"ratio", report.volume.ratio},
                {"summary", report.volume.summary}}}};
    std::ofstream f(fs::path(out_dir) / "compare_ef.json");
    f << j.dump(2) << "\n";
    return report;
}

}  // namespace nlos
