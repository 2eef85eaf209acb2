#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlos/errors.hpp"

namespace nlos {

enum class Polarity : int8_t { Off = -1, On = 1 };

inline int polarityValue(Polarity p) { return static_cast<int>(p); }

/// One asynchronous brightness-change event: (t, x, y, p).
struct Event {
    uint64_t t_us = 0;
    uint16_t x = 0;
    uint16_t y = 0;
    Polarity polarity = Polarity::On;

    friend bool operator==(const Event&, const Event&) = default;
};

struct SensorGeometry {
    uint16_t width = 0;
    uint16_t height = 0;

    friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

/// Canonical ordering: (t, y, x, polarity) ascending. Off (-1) sorts
/// before On (+1) at equal coordinates.
bool eventLess(const Event& a, const Event& b);

/// Ordered event sequence with its sensor geometry. Treated as immutable
/// once built; all operations return new streams.
struct EventStream {
    SensorGeometry geometry;
    std::vector<Event> events;

    friend bool operator==(const EventStream&, const EventStream&) = default;
};

struct Violation {
    size_t event_index = 0;
    std::string message;
};

/// Returns the first violated stream invariant, or nullopt if valid.
std::optional<Violation> validate(const EventStream& stream);

/// Events with t0 <= t < t1, order preserved. Throws InvalidWindow if t0 > t1.
EventStream sliceTime(const EventStream& stream, uint64_t t0, uint64_t t1);

/// NEVT1 binary format: "NEVT" magic, version 1, 20-byte header,
/// 16-byte little-endian records.
std::vector<uint8_t> writeBinary(const EventStream& stream);
EventStream readBinary(const std::vector<uint8_t>& bytes);
void writeBinaryFile(const std::string& path, const EventStream& stream);
EventStream readBinaryFile(const std::string& path);

/// CSV with header line "t_us,x,y,p"; p is 1 or -1.
std::string writeCsv(const EventStream& stream);
EventStream readCsv(const std::string& text, SensorGeometry geometry);

}  // namespace nlos
