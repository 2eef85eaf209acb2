#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nlos/event_sim.hpp"
#include "nlos/features.hpp"
#include "nlos/forward_model.hpp"
#include "nlos/metrics.hpp"
#include "nlos/reconstruct.hpp"

namespace nlos {

enum class Modality { Event, Frame };

std::string modalityName(Modality m);

struct TargetSourceSpec {
    enum class Kind { Builtin, IdxUbyte, PgmDirectory };
    Kind kind = Kind::Builtin;
    std::string images_path;  // IDX image archive, or PGM directory
    std::string labels_path;  // IDX label archive
};

/// MNIST-style IDX archives: images magic 0x00000803, labels 0x00000801,
/// big-endian headers, 28x28 unsigned bytes.
std::vector<std::pair<int, Image>> loadIdxDigits(const std::string& images_path,
                                                 const std::string& labels_path);

struct DatasetProfile {
    int n_per_digit = 2;
    int n_positions = 6;
    double pose_span_m = 0.02;
    double seconds_per_position = 0.1;
    bool full_scale = false;  // mirrors the 3950/130/210 split arithmetic
};

struct PipelineConfig {
    SceneGeometry geometry{0.05, 0.3, 28, 0.5, 128};
    EventSimConfig sim;
    double frame_rate_hz = 100.0;
    int feature_res = 32;
    double tau_us = 0.0;  // 0 selects 3x bin width per sequence
    PolarityMode polarity_mode = PolarityMode::MergedMax;
};

struct SampleRecord {
    std::string id;
    int digit = 0;
    int variant = 0;
    int bin = 0;
    double pose_dx_m = 0.0;
    double pose_dy_m = 0.0;
    uint64_t t_us = 0;
    std::string gt_path;
    std::string feature_path;  // E-mode input, feature_res^2 PGM
    std::string frame_path;    // F-mode input, feature_res^2 PGM
    std::string events_path;
};

struct SequenceInfo {
    double wall_scale = 1.0;  // PGM normalization factor for the sequence
    double tau_us = 0.0;
};

struct ByteTotals {
    uint64_t events = 0;
    uint64_t frames = 0;
    uint64_t features = 0;
};

struct DatasetManifest {
    uint64_t seed = 0;
    std::string source_kind = "builtin";
    DatasetProfile profile;
    PipelineConfig config;
    std::map<std::string, std::vector<SampleRecord>> splits;  // train / val / test
    std::map<std::string, SequenceInfo> sequences;
    ByteTotals byte_totals;
};

/// Renders, simulates and featurizes every sample; writes all files and
/// the manifest under out_dir. With dry_run only the split bookkeeping is
/// produced (no files), which is how the full-scale profile is counted.
DatasetManifest generateDataset(const TargetSourceSpec& source, const DatasetProfile& profile,
                                const PipelineConfig& config, uint64_t seed,
                                const std::string& out_dir, bool dry_run = false);

void writeManifestFile(const std::string& path, const DatasetManifest& manifest);
DatasetManifest readManifestFile(const std::string& path);

/// Checks that every referenced file exists, parses, and passes module
/// validation; throws on the first failure.
void validateManifest(const DatasetManifest& manifest, const std::string& root_dir);

TrainResult runTraining(const DatasetManifest& manifest, const std::string& root_dir,
                        Modality modality, const TrainConfig& config);

/// Writes <prefix>.nlrw plus a <prefix>.json sidecar with the config and
/// loss trace.
void saveModel(const std::string& prefix, const TrainResult& result, const TrainConfig& config,
               Modality modality);

struct DigitAggregate {
    int n = 0;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    double mean_cd_dev = 0.0;
    int cd_excluded = 0;   // NoForeground samples, left out of the Cd mean
    int psnr_inf = 0;      // identical-image sentinel count, left out of the mean
};

struct EvalReport {
    DigitAggregate overall;
    std::map<int, DigitAggregate> per_digit;
};

EvalReport runEval(const DatasetManifest& manifest, const std::string& root_dir,
                   const LinearReconstructor& model, const std::string& split,
                   Modality modality, const std::string& out_dir);

struct CompareReport {
    EvalReport event_eval;
    EvalReport frame_eval;
    DataVolumeReport volume;
};

/// Trains one model per modality under identical config, evaluates both
/// on the test split and reports the data-volume ratio.
CompareReport runCompareEf(const DatasetManifest& manifest, const std::string& root_dir,
                           const TrainConfig& config, const std::string& out_dir);

}  // namespace nlos
