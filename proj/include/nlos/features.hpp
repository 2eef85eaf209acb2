#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nlos/event_core.hpp"
#include "nlos/image.hpp"

namespace nlos {

enum class PolarityMode { SeparateChannels, MergedMax };

struct TimeSurfaceConfig {
    double tau_us = 0.0;  // must be set > 0; pipeline defaults to bin_width / 3
    int radius = 0;       // neighborhood radius for per-event patches
    PolarityMode polarity_mode = PolarityMode::MergedMax;

    void check() const;
};

/// One voxel-grid bin's featurized view of the stream: 1 channel for
/// MergedMax, 2 (on, off) for SeparateChannels. Values in [0,1].
struct FeatureFrame {
    uint64_t bin_end_us = 0;
    std::vector<Image> channels;
};

/// Per-pixel most recent event time <= t_query of the given polarity.
using TimestampMap = std::vector<std::optional<uint64_t>>;
TimestampMap lastTimestampMap(const EventStream& stream, uint64_t t_query, Polarity polarity);

/// Full-frame exponential-decay surface at t_query; pixels with no prior
/// event of the channel polarity map to 0.
FeatureFrame timeSurfaceFrame(const EventStream& stream, uint64_t t_query,
                              const TimeSurfaceConfig& config);

/// (2r+1)^2 patch of decayed most-recent same-polarity event times around
/// event event_index, evaluated at that event's timestamp. Center cell = 1.
Image eventTimeSurfacePatch(const EventStream& stream, size_t event_index, int radius,
                            double tau_us);

/// Equal half-open time bins over [t_first, t_last] (last bin closed);
/// each bin summarized by the time surface at its end time.
std::vector<FeatureFrame> voxelGridFeatures(const EventStream& stream, int n_bins,
                                            const TimeSurfaceConfig& config);

/// Per-pixel event counts in [t0, t1). One map, or (on, off) per polarity.
std::vector<std::vector<uint32_t>> eventCountMap(const EventStream& stream, uint64_t t0,
                                                 uint64_t t1, bool per_polarity);

}  // namespace nlos
