#include <doctest.h>

#include <cmath>
#include <random>

#include "nlos/features.hpp"

using namespace nlos;

namespace {

EventStream makeStream(std::initializer_list<Event> events, uint16_t w = 8, uint16_t h = 8) {
    EventStream s;
    s.geometry = {w, h};
    s.events = events;
    std::sort(s.events.begin(), s.events.end(), eventLess);
    return s;
}

TimeSurfaceConfig cfg(double tau, PolarityMode mode = PolarityMode::MergedMax) {
    TimeSurfaceConfig c;
    c.tau_us = tau;
    c.polarity_mode = mode;
    return c;
}

EventStream randomStream(std::mt19937_64& rng, size_t n, uint16_t w = 6, uint16_t h = 6) {
    EventStream s;
    s.geometry = {w, h};
    uint64_t t = 1;
    std::uniform_int_distribution<uint64_t> dt(1, 300);
    std::uniform_int_distribution<int> dx(0, w - 1), dy(0, h - 1), dp(0, 1);
    for (size_t i = 0; i < n; ++i) {
        t += dt(rng);
        s.events.push_back({t, static_cast<uint16_t>(dx(rng)), static_cast<uint16_t>(dy(rng)),
                            dp(rng) ? Polarity::On : Polarity::Off});
    }
    return s;
}

}  // namespace

TEST_CASE("last_timestamp_map basics") {
    auto empty = makeStream({});
    auto map = lastTimestampMap(empty, 100, Polarity::On);
    for (const auto& v : map) CHECK(!v);

    auto s = makeStream({{10, 2, 3, Polarity::On}, {40, 2, 3, Polarity::On}});
    map = lastTimestampMap(s, 25, Polarity::On);
    CHECK(map[3 * 8 + 2] == 10);
    map = lastTimestampMap(s, 50, Polarity::On);
    CHECK(map[3 * 8 + 2] == 40);
    map = lastTimestampMap(s, 5, Polarity::On);
    CHECK(!map[3 * 8 + 2]);
    // Polarity filter.
    map = lastTimestampMap(s, 50, Polarity::Off);
    CHECK(!map[3 * 8 + 2]);
}

TEST_CASE("time surface evaluates the decay kernel") {
    const double tau = 1000.0;
    auto s = makeStream({{500, 1, 1, Polarity::On}});
    auto atEvent = timeSurfaceFrame(s, 500, cfg(tau));
    CHECK(atEvent.channels[0].at(1, 1) == 1.0);
    auto oneTau = timeSurfaceFrame(s, 500 + 1000, cfg(tau));
    CHECK(oneTau.channels[0].at(1, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(oneTau.channels[0].at(0, 0) == 0.0);  // no history
}

TEST_CASE("separate channels keep polarities apart; merged takes the max") {
    auto s = makeStream({{100, 1, 1, Polarity::On}, {200, 1, 1, Polarity::Off}});
    auto sep = timeSurfaceFrame(s, 200, cfg(100.0, PolarityMode::SeparateChannels));
    REQUIRE(sep.channels.size() == 2);
    CHECK(sep.channels[0].at(1, 1) == doctest::Approx(std::exp(-1.0)));
    CHECK(sep.channels[1].at(1, 1) == 1.0);
    auto merged = timeSurfaceFrame(s, 200, cfg(100.0, PolarityMode::MergedMax));
    REQUIRE(merged.channels.size() == 1);
    CHECK(merged.channels[0].at(1, 1) == 1.0);
}

TEST_CASE("temporal decay property between two query times") {
    std::mt19937_64 rng(3);
    auto s = randomStream(rng, 40);
    const double tau = 700.0;
    const uint64_t t1 = s.events.back().t_us + 100;
    const uint64_t t2 = t1 + 1234;
    auto f1 = timeSurfaceFrame(s, t1, cfg(tau));
    auto f2 = timeSurfaceFrame(s, t2, cfg(tau));
    const double decay = std::exp(-static_cast<double>(t2 - t1) / tau);
    for (size_t i = 0; i < f1.channels[0].data.size(); ++i) {
        CHECK(f2.channels[0].data[i] == doctest::Approx(f1.channels[0].data[i] * decay).epsilon(1e-12));
    }
}

TEST_CASE("all surface values lie in [0,1]") {
    std::mt19937_64 rng(11);
    auto s = randomStream(rng, 200);
    auto f = timeSurfaceFrame(s, s.events.back().t_us, cfg(50.0));
    for (double v : f.channels[0].data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("per-event patch: isolated first event") {
    auto s = makeStream({{100, 4, 4, Polarity::On}});
    auto patch = eventTimeSurfacePatch(s, 0, 2, 500.0);
    REQUIRE(patch.width == 5);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) CHECK(patch.at(y, x) == ((y == 2 && x == 2) ? 1.0 : 0.0));

    auto tiny = eventTimeSurfacePatch(s, 0, 0, 500.0);
    REQUIRE(tiny.width == 1);
    CHECK(tiny.at(0, 0) == 1.0);
}

TEST_CASE("per-event patch: neighbor that fired tau earlier decays to 1/e") {
    const double tau = 800.0;
    auto s = makeStream({{200, 3, 4, Polarity::On}, {1000, 4, 4, Polarity::On}});
    auto patch = eventTimeSurfacePatch(s, 1, 1, tau);
    CHECK(patch.at(1, 1) == 1.0);
    CHECK(patch.at(1, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("per-event patch only sees same-polarity history and j <= i") {
    auto s = makeStream({{200, 3, 4, Polarity::Off}, {1000, 4, 4, Polarity::On},
                         {1500, 3, 4, Polarity::On}});
    auto patch = eventTimeSurfacePatch(s, 1, 1, 500.0);
    CHECK(patch.at(1, 0) == 0.0);  // off-polarity neighbor, later on-event is j > i

    CHECK_THROWS_AS(eventTimeSurfacePatch(s, 9, 1, 500.0), IndexOutOfRange);
}

TEST_CASE("patch agrees with the same-polarity full-frame surface at t_i") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 5; ++rep) {
        auto s = randomStream(rng, 60);
        std::sort(s.events.begin(), s.events.end(), eventLess);
        const size_t idx = s.events.size() - 1;  // whole stream is its history
        const Event& ei = s.events[idx];
        const int radius = 2;
        auto patch = eventTimeSurfacePatch(s, idx, radius, 333.0);
        // Brute-force oracle straight from the definition.
        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx) {
                double expected = 0.0;
                for (size_t j = 0; j <= idx; ++j) {
                    const Event& ej = s.events[j];
                    if (ej.polarity != ei.polarity) continue;
                    if (static_cast<int>(ej.x) != static_cast<int>(ei.x) + dx ||
                        static_cast<int>(ej.y) != static_cast<int>(ei.y) + dy)
                        continue;
                    expected = std::max(
                        expected, std::exp(-static_cast<double>(ei.t_us - ej.t_us) / 333.0));
                }
                if (dx == 0 && dy == 0) expected = 1.0;
                CHECK(patch.at(dy + radius, dx + radius) == doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("voxel grid: single bin equals the whole-stream surface") {
    std::mt19937_64 rng(5);
    auto s = randomStream(rng, 30);
    std::sort(s.events.begin(), s.events.end(), eventLess);
    auto bins = voxelGridFeatures(s, 1, cfg(444.0));
    REQUIRE(bins.size() == 1);
    auto whole = timeSurfaceFrame(s, s.events.back().t_us, cfg(444.0));
    CHECK(bins[0].channels[0].data == whole.channels[0].data);
    CHECK(bins[0].bin_end_us == s.events.back().t_us);
}

TEST_CASE("voxel grid: one-event stream over two bins") {
    auto s = makeStream({{1000, 2, 2, Polarity::On}, {3000, 5, 5, Polarity::On}});
    auto bins = voxelGridFeatures(s, 2, cfg(1000.0));
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].bin_end_us == 2000);
    // First bin sees only the t=1000 event, decayed to the bin end.
    CHECK(bins[0].channels[0].at(2, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(bins[0].channels[0].at(5, 5) == 0.0);
    // Final bin is closed and sees everything.
    CHECK(bins[1].bin_end_us == 3000);
    CHECK(bins[1].channels[0].at(5, 5) == 1.0);
}

TEST_CASE("increasing the bin count never changes the final bin") {
    std::mt19937_64 rng(23);
    auto s = randomStream(rng, 80);
    std::sort(s.events.begin(), s.events.end(), eventLess);
    auto a = voxelGridFeatures(s, 2, cfg(250.0));
    auto b = voxelGridFeatures(s, 7, cfg(250.0));
    CHECK(a.back().channels[0].data == b.back().channels[0].data);
    CHECK_THROWS_AS(voxelGridFeatures(EventStream{{4, 4}, {}}, 2, cfg(100.0)), EmptyStream);
}

TEST_CASE("event count map") {
    auto s = makeStream({{10, 1, 1, Polarity::On}, {20, 1, 1, Polarity::Off},
                         {30, 2, 2, Polarity::On}});
    auto maps = eventCountMap(s, 0, 25, false);
    REQUIRE(maps.size() == 1);
    CHECK(maps[0][1 * 8 + 1] == 2);
    CHECK(maps[0][2 * 8 + 2] == 0);

    auto split = eventCountMap(s, 0, 100, true);
    REQUIRE(split.size() == 2);
    CHECK(split[0][1 * 8 + 1] == 1);
    CHECK(split[1][1 * 8 + 1] == 1);

    auto emptyWin = eventCountMap(s, 50, 50, false);
    for (auto c : emptyWin[0]) CHECK(c == 0);
}

TEST_CASE("count map total equals the slice length, for random streams") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 5; ++rep) {
        auto s = randomStream(rng, 120);
        std::sort(s.events.begin(), s.events.end(), eventLess);
        const uint64_t t0 = 500, t1 = 9000;
        auto maps = eventCountMap(s, t0, t1, false);
        uint64_t total = 0;
        for (auto c : maps[0]) total += c;
        CHECK(total == sliceTime(s, t0, t1).events.size());
    }
}
