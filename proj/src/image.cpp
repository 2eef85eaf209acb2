#include "nlos/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace nlos {

double Image::sum() const {
    double s = 0.0;
    for (double v : data) s += v;
    return s;
}

double Image::maxValue() const {
    double m = 0.0;
    for (double v : data) m = std::max(m, v);
    return m;
}

Image& Image::clampNonNegative() {
    for (double& v : data) v = std::max(0.0, v);
    return *this;
}

Image& Image::clampUnit() {
    for (double& v : data) v = std::clamp(v, 0.0, 1.0);
    return *this;
}

Image areaResample(const Image& src, int outWidth, int outHeight) {
    if (outWidth < 1 || outHeight < 1 || src.width < 1 || src.height < 1) {
        throw DimMismatch("areaResample: empty image");
    }
    Image out(outWidth, outHeight);
    const double sx = static_cast<double>(src.width) / outWidth;
    const double sy = static_cast<double>(src.height) / outHeight;
    for (int oy = 0; oy < outHeight; ++oy) {
        const double y0 = oy * sy;
        const double y1 = (oy + 1) * sy;
        for (int ox = 0; ox < outWidth; ++ox) {
            const double x0 = ox * sx;
            const double x1 = (ox + 1) * sx;
            double acc = 0.0;
            for (int y = static_cast<int>(std::floor(y0)); y < static_cast<int>(std::ceil(y1)); ++y) {
                const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
                if (wy <= 0.0 || y >= src.height) continue;
                for (int x = static_cast<int>(std::floor(x0)); x < static_cast<int>(std::ceil(x1)); ++x) {
                    const double wx = std::min<double>(x + 1, x1) - std::max<double>(x, x0);
                    if (wx <= 0.0 || x >= src.width) continue;
                    acc += src.at(y, x) * wx * wy;
                }
            }
            out.at(oy, ox) = acc / (sx * sy);
        }
    }
    return out;
}

Image shiftImage(const Image& src, int dx, int dy) {
    Image out(src.width, src.height, 0.0);
    for (int y = 0; y < src.height; ++y) {
        const int sy = y - dy;
        if (sy < 0 || sy >= src.height) continue;
        for (int x = 0; x < src.width; ++x) {
            const int sx = x - dx;
            if (sx < 0 || sx >= src.width) continue;
            out.at(y, x) = src.at(sy, sx);
        }
    }
    return out;
}

void writePgm16(const std::string& path, const Image& img, double scale) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    f << "P5\n" << img.width << " " << img.height << "\n65535\n";
    std::vector<uint8_t> buf(static_cast<size_t>(img.width) * img.height * 2);
    size_t k = 0;
    for (double v : img.data) {
        double s = scale > 0.0 ? v / scale : 0.0;
        long q = std::lround(std::clamp(s, 0.0, 1.0) * 65535.0);
        buf[k++] = static_cast<uint8_t>((q >> 8) & 0xff);
        buf[k++] = static_cast<uint8_t>(q & 0xff);
    }
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!f) throw IoError("short write: " + path);
}

namespace {

int readPnmToken(std::istream& in) {
    // Skips whitespace and '#' comments per the PNM grammar.
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF) throw ParseError("unexpected end of PGM header");
    int value = 0;
    while (c != EOF && std::isdigit(c)) {
        value = value * 10 + (c - '0');
        c = in.get();
    }
    return value;
}

}  // namespace

Image readPgm16(const std::string& path, double scale) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for read: " + path);
    char m0 = 0, m1 = 0;
    f.get(m0);
    f.get(m1);
    if (m0 != 'P' || m1 != '5') throw BadMagic("not a P5 PGM: " + path);
    const int w = readPnmToken(f);
    const int h = readPnmToken(f);
    const int maxval = readPnmToken(f);
    if (w < 1 || h < 1) throw ParseError("bad PGM dimensions: " + path);
    const int bytesPerSample = maxval > 255 ? 2 : 1;
    std::vector<uint8_t> buf(static_cast<size_t>(w) * h * bytesPerSample);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (f.gcount() != static_cast<std::streamsize>(buf.size())) {
        throw TruncatedRecord("PGM pixel data truncated: " + path);
    }
    Image img(w, h);
    for (size_t i = 0; i < img.data.size(); ++i) {
        int q = bytesPerSample == 2 ? (buf[2 * i] << 8) | buf[2 * i + 1] : buf[i];
        img.data[i] = static_cast<double>(q) / maxval * scale;
    }
    return img;
}

}  // namespace nlos
