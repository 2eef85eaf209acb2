#include "nlos/features.hpp"

#include <algorithm>
#include <cmath>

namespace nlos {

void TimeSurfaceConfig::check() const {
    if (tau_us <= 0.0) throw DimMismatch("TimeSurfaceConfig: tau must be > 0");
    if (radius < 0) throw DimMismatch("TimeSurfaceConfig: radius must be >= 0");
}

TimestampMap lastTimestampMap(const EventStream& stream, uint64_t t_query, Polarity polarity) {
    TimestampMap map(static_cast<size_t>(stream.geometry.width) * stream.geometry.height);
    for (const Event& e : stream.events) {
        if (e.t_us > t_query) break;
        if (e.polarity != polarity) continue;
        map[static_cast<size_t>(e.y) * stream.geometry.width + e.x] = e.t_us;
    }
    return map;
}

namespace {

Image decaySurface(const TimestampMap& map, int width, int height, uint64_t t_query,
                   double tau_us) {
    Image img(width, height);
    for (size_t p = 0; p < map.size(); ++p) {
        if (!map[p]) continue;
        const double dt = static_cast<double>(t_query - *map[p]);
        img.data[p] = std::exp(-dt / tau_us);
    }
    return img;
}

}  // namespace

FeatureFrame timeSurfaceFrame(const EventStream& stream, uint64_t t_query,
                              const TimeSurfaceConfig& config) {
    config.check();
    const int w = stream.geometry.width;
    const int h = stream.geometry.height;
    const Image on = decaySurface(lastTimestampMap(stream, t_query, Polarity::On), w, h,
                                  t_query, config.tau_us);
    const Image off = decaySurface(lastTimestampMap(stream, t_query, Polarity::Off), w, h,
                                   t_query, config.tau_us);
    FeatureFrame frame;
    frame.bin_end_us = t_query;
    if (config.polarity_mode == PolarityMode::SeparateChannels) {
        frame.channels = {on, off};
    } else {
        Image merged(w, h);
        for (size_t i = 0; i < merged.data.size(); ++i) {
            merged.data[i] = std::max(on.data[i], off.data[i]);
        }
        frame.channels = {std::move(merged)};
    }
    return frame;
}

Image eventTimeSurfacePatch(const EventStream& stream, size_t event_index, int radius,
                            double tau_us) {
    if (event_index >= stream.events.size()) {
        throw IndexOutOfRange("event_time_surface_patch: event index out of range");
    }
    if (tau_us <= 0.0 || radius < 0) {
        throw DimMismatch("event_time_surface_patch: bad tau or radius");
    }
    const Event& ei = stream.events[event_index];
    const int side = 2 * radius + 1;
    Image patch(side, side);
    // Most recent same-polarity times over events j <= i.
    for (size_t j = 0; j <= event_index; ++j) {
        const Event& ej = stream.events[j];
        if (ej.polarity != ei.polarity) continue;
        const int dx = static_cast<int>(ej.x) - static_cast<int>(ei.x);
        const int dy = static_cast<int>(ej.y) - static_cast<int>(ei.y);
        if (std::abs(dx) > radius || std::abs(dy) > radius) continue;
        const double dt = static_cast<double>(ei.t_us - ej.t_us);
        const double v = std::exp(-dt / tau_us);
        double& cell = patch.at(dy + radius, dx + radius);
        cell = std::max(cell, v);  // max over j <= i is the latest time
    }
    patch.at(radius, radius) = 1.0;
    return patch;
}

std::vector<FeatureFrame> voxelGridFeatures(const EventStream& stream, int n_bins,
                                            const TimeSurfaceConfig& config) {
    config.check();
    if (n_bins < 1) throw DimMismatch("voxel_grid_features: n_bins must be >= 1");
    if (stream.events.empty()) throw EmptyStream("voxel_grid_features: empty stream");
    const uint64_t tFirst = stream.events.front().t_us;
    const uint64_t tLast = stream.events.back().t_us;
    const double span = static_cast<double>(tLast - tFirst);
    std::vector<FeatureFrame> frames;
    frames.reserve(n_bins);
    for (int k = 0; k < n_bins; ++k) {
        const bool last = k == n_bins - 1;
        const uint64_t binEnd =
            last ? tLast
                 : tFirst + static_cast<uint64_t>(std::llround(span * (k + 1) / n_bins));
        // Half-open bins: events strictly before the bin end, except the
        // final closed bin which includes t = tLast.
        EventStream visible = sliceTime(stream, tFirst, last ? tLast + 1 : binEnd);
        frames.push_back(timeSurfaceFrame(visible, binEnd, config));
    }
    return frames;
}

std::vector<std::vector<uint32_t>> eventCountMap(const EventStream& stream, uint64_t t0,
                                                 uint64_t t1, bool per_polarity) {
    if (t0 > t1) throw InvalidWindow("event_count_map: t0 > t1");
    const size_t nPix = static_cast<size_t>(stream.geometry.width) * stream.geometry.height;
    std::vector<std::vector<uint32_t>> maps(per_polarity ? 2 : 1,
                                            std::vector<uint32_t>(nPix, 0));
    for (const Event& e : stream.events) {
        if (e.t_us < t0 || e.t_us >= t1) continue;
        const size_t p = static_cast<size_t>(e.y) * stream.geometry.width + e.x;
        if (per_polarity) {
            maps[e.polarity == Polarity::On ? 0 : 1][p] += 1;
        } else {
            maps[0][p] += 1;
        }
    }
    return maps;
}

}  // namespace nlos
