#include "nlos/event_core.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nlos {

namespace {

constexpr char kMagic[4] = {'N', 'E', 'V', 'T'};
constexpr uint8_t kVersion = 1;
constexpr size_t kHeaderBytes = 20;
constexpr size_t kRecordBytes = 16;

void putU16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
}

void putU64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

uint16_t getU16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint64_t getU64(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace

bool eventLess(const Event& a, const Event& b) {
    if (a.t_us != b.t_us) return a.t_us < b.t_us;
    if (a.y != b.y) return a.y < b.y;
    if (a.x != b.x) return a.x < b.x;
    return polarityValue(a.polarity) < polarityValue(b.polarity);
}

std::optional<Violation> validate(const EventStream& stream) {
    const auto& g = stream.geometry;
    for (size_t i = 0; i < stream.events.size(); ++i) {
        const Event& e = stream.events[i];
        if (e.x >= g.width || e.y >= g.height) {
            return Violation{i, "out of bounds"};
        }
        if (e.polarity != Polarity::On && e.polarity != Polarity::Off) {
            return Violation{i, "invalid polarity"};
        }
        if (i > 0) {
            const Event& prev = stream.events[i - 1];
            if (e.t_us < prev.t_us) {
                return Violation{i, "unsorted at index " + std::to_string(i)};
            }
            if (e.t_us == prev.t_us && eventLess(e, prev)) {
                return Violation{i, "tie-break order violated at index " + std::to_string(i)};
            }
        }
    }
    return std::nullopt;
}

EventStream sliceTime(const EventStream& stream, uint64_t t0, uint64_t t1) {
    if (t0 > t1) throw InvalidWindow("slice_time: t0 > t1");
    EventStream out;
    out.geometry = stream.geometry;
    auto lo = std::lower_bound(stream.events.begin(), stream.events.end(), t0,
                               [](const Event& e, uint64_t t) { return e.t_us < t; });
    auto hi = std::lower_bound(lo, stream.events.end(), t1,
                               [](const Event& e, uint64_t t) { return e.t_us < t; });
    out.events.assign(lo, hi);
    return out;
}

std::vector<uint8_t> writeBinary(const EventStream& stream) {
    std::vector<uint8_t> out;
    out.reserve(kHeaderBytes + stream.events.size() * kRecordBytes);
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    out.push_back(0);  // flags
    putU16(out, stream.geometry.width);
    putU16(out, stream.geometry.height);
    putU16(out, 0);  // reserved, keeps the header at 20 bytes
    putU64(out, stream.events.size());
    for (const Event& e : stream.events) {
        putU64(out, e.t_us);
        putU16(out, e.x);
        putU16(out, e.y);
        out.push_back(static_cast<uint8_t>(polarityValue(e.polarity)));
        out.push_back(0);
        out.push_back(0);
        out.push_back(0);
    }
    return out;
}

EventStream readBinary(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < kHeaderBytes) throw TruncatedRecord("NEVT1 header truncated");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw BadMagic("not an NEVT1 stream");
    if (bytes[4] != kVersion) throw BadVersion("unsupported NEVT1 version " + std::to_string(bytes[4]));
    EventStream s;
    s.geometry.width = getU16(bytes.data() + 6);
    s.geometry.height = getU16(bytes.data() + 8);
    const uint64_t count = getU64(bytes.data() + 12);
    const size_t expected = kHeaderBytes + count * kRecordBytes;
    if (bytes.size() < expected) throw TruncatedRecord("NEVT1 record data truncated");
    if (bytes.size() > expected) throw CountMismatch("NEVT1 trailing bytes after declared count");
    s.events.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        const uint8_t* p = bytes.data() + kHeaderBytes + i * kRecordBytes;
        Event e;
        e.t_us = getU64(p);
        e.x = getU16(p + 8);
        e.y = getU16(p + 10);
        const int8_t pol = static_cast<int8_t>(p[12]);
        if (pol != 1 && pol != -1) {
            throw ParseError("NEVT1 record " + std::to_string(i) + ": bad polarity byte");
        }
        e.polarity = pol == 1 ? Polarity::On : Polarity::Off;
        s.events.push_back(e);
    }
    return s;
}

void writeBinaryFile(const std::string& path, const EventStream& stream) {
    const auto bytes = writeBinary(stream);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("short write: " + path);
}

EventStream readBinaryFile(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for read: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return readBinary(bytes);
}

std::string writeCsv(const EventStream& stream) {
    std::ostringstream out;
    out << "t_us,x,y,p\n";
    for (const Event& e : stream.events) {
        out << e.t_us << ',' << e.x << ',' << e.y << ',' << polarityValue(e.polarity) << '\n';
    }
    return out.str();
}

EventStream readCsv(const std::string& text, SensorGeometry geometry) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t_us,x,y,p") throw ParseError("bad CSV header at line 1");
    EventStream s;
    s.geometry = geometry;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        long long t = 0, x = 0, y = 0, p = 0;
        char comma1 = 0, comma2 = 0, comma3 = 0;
        std::istringstream row(line);
        row >> t >> comma1 >> x >> comma2 >> y >> comma3 >> p;
        if (row.fail() || comma1 != ',' || comma2 != ',' || comma3 != ',' ||
            t < 0 || x < 0 || y < 0 || x > 0xffff || y > 0xffff || (p != 1 && p != -1)) {
            throw ParseError("malformed CSV row at line " + std::to_string(lineno));
        }
        Event e;
        e.t_us = static_cast<uint64_t>(t);
        e.x = static_cast<uint16_t>(x);
        e.y = static_cast<uint16_t>(y);
        e.polarity = p == 1 ? Polarity::On : Polarity::Off;
        s.events.push_back(e);
    }
    return s;
}

}  // namespace nlos
