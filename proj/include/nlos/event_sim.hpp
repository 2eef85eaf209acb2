#pragma once

#include <cstdint>

#include "nlos/event_core.hpp"
#include "nlos/forward_model.hpp"

namespace nlos {

/// Per-pixel contrast-threshold model: an event fires each time the
/// pixel's log intensity moves by the threshold from its reference level.
struct EventSimConfig {
    double contrast_threshold = 0.15;  // log-intensity units
    double log_floor = 1e-5;           // added before the log
    uint64_t refractory_us = 0;
    bool threshold_jitter = false;     // optional per-pixel Gaussian jitter
    double jitter_sigma = 0.0;
    uint64_t jitter_seed = 0;

    void check() const;
};

/// Converts a timestamped intensity video into an event stream.
/// Log intensity is treated as linear in time between consecutive frames;
/// crossing times are rounded to the nearest microsecond.
EventStream simulateEvents(const std::vector<WallFrame>& frames, const EventSimConfig& config);

struct EventRateReport {
    uint64_t total = 0;
    uint64_t on_count = 0;
    uint64_t off_count = 0;
    double events_per_second = 0.0;
};

EventRateReport eventRateReport(const EventStream& stream, double duration_s);

}  // namespace nlos
