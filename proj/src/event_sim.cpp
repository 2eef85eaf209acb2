#include "nlos/event_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nlos {

void EventSimConfig::check() const {
    if (contrast_threshold <= 0.0) throw DimMismatch("EventSimConfig: contrast threshold must be > 0");
    if (log_floor <= 0.0) throw DimMismatch("EventSimConfig: log floor must be > 0");
}

EventStream simulateEvents(const std::vector<WallFrame>& frames, const EventSimConfig& config) {
    config.check();
    if (frames.size() < 2) throw TooFewFrames("simulate_events: need at least 2 frames");
    const int w = frames[0].image.width;
    const int h = frames[0].image.height;
    for (size_t k = 0; k < frames.size(); ++k) {
        if (frames[k].image.width != w || frames[k].image.height != h) {
            throw MismatchedDims("simulate_events: frame " + std::to_string(k) + " dimension mismatch");
        }
        if (k > 0 && frames[k].t_us <= frames[k - 1].t_us) {
            throw NonMonotonicTimestamps("simulate_events: frame timestamps must strictly increase");
        }
    }

    std::vector<double> thresholds(static_cast<size_t>(w) * h, config.contrast_threshold);
    if (config.threshold_jitter && config.jitter_sigma > 0.0) {
        std::mt19937_64 rng(config.jitter_seed);
        std::normal_distribution<double> jitter(0.0, config.jitter_sigma);
        for (double& c : thresholds) c = std::max(1e-6, c + jitter(rng));
    }

    // Slack absorbs rounding in log(), so a step of exactly k*C yields k events.
    const double slack = 1e-9;
    EventStream out;
    out.geometry = SensorGeometry{static_cast<uint16_t>(w), static_cast<uint16_t>(h)};

    const size_t nPix = static_cast<size_t>(w) * h;
    std::vector<double> refLog(nPix);
    for (size_t p = 0; p < nPix; ++p) {
        refLog[p] = std::log(frames[0].image.data[p] + config.log_floor);
    }
    std::vector<uint64_t> lastEmit(nPix, 0);
    std::vector<bool> hasEmitted(nPix, false);

    for (size_t k = 1; k < frames.size(); ++k) {
        const double tA = static_cast<double>(frames[k - 1].t_us);
        const double tB = static_cast<double>(frames[k].t_us);
        for (size_t p = 0; p < nPix; ++p) {
            const double lA = std::log(frames[k - 1].image.data[p] + config.log_floor);
            const double lB = std::log(frames[k].image.data[p] + config.log_floor);
            if (lA == lB) continue;
            const double c = thresholds[p];
            const double dir = lB > lA ? 1.0 : -1.0;
            while ((lB - refLog[p]) * dir >= c * (1.0 - slack)) {
                const double level = refLog[p] + dir * c;
                double f = (level - lA) / (lB - lA);
                f = std::clamp(f, 0.0, 1.0);
                const uint64_t t = static_cast<uint64_t>(std::llround(tA + f * (tB - tA)));
                refLog[p] = level;
                const bool suppressed = config.refractory_us > 0 && hasEmitted[p] &&
                                        t < lastEmit[p] + config.refractory_us;
                if (!suppressed) {
                    Event e;
                    e.t_us = t;
                    e.x = static_cast<uint16_t>(p % w);
                    e.y = static_cast<uint16_t>(p / w);
                    e.polarity = dir > 0 ? Polarity::On : Polarity::Off;
                    out.events.push_back(e);
                    lastEmit[p] = t;
                    hasEmitted[p] = true;
                }
            }
        }
    }
    std::sort(out.events.begin(), out.events.end(), eventLess);
    return out;
}

EventRateReport eventRateReport(const EventStream& stream, double duration_s) {
    if (duration_s <= 0.0) throw InvalidWindow("event_rate_report: duration must be > 0");
    EventRateReport r;
    r.total = stream.events.size();
    for (const Event& e : stream.events) {
        if (e.polarity == Polarity::On)
            ++r.on_count;
        else
            ++r.off_count;
    }
    r.events_per_second = static_cast<double>(r.total) / duration_s;
    return r;
}

}  // namespace nlos
