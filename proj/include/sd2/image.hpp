#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <iterator>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sd2/error.hpp"

namespace sd2 {

/// 8-bit image, channel-interleaved. A stego carrier is always 3 channels.
struct Image {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(std::size_t h, std::size_t w, std::size_t c, std::uint8_t fill = 0)
        : height(h), width(w), channels(c), pixels(h * w * c, fill) {}

    std::size_t size() const noexcept { return pixels.size(); }
    bool same_shape(const Image& o) const noexcept {
        return height == o.height && width == o.width && channels == o.channels;
    }
    std::uint8_t& at(std::size_t y, std::size_t x, std::size_t c) { return pixels[(y * width + x) * channels + c]; }
    std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const { return pixels[(y * width + x) * channels + c]; }

    friend bool operator==(const Image&, const Image&) = default;
};

using StegoImage = Image;

inline std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "short write to " + path);
}

inline void write_file(const std::string& path, std::string_view text) {
    write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// Binary PGM (P5), maxval <= 255.
inline Image decode_pgm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_uint = [&](const char* what) {
        skip_space();
        std::size_t v = 0;
        std::size_t digits = 0;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
            v = v * 10 + static_cast<std::size_t>(bytes[pos++] - '0');
            if (++digits > 9) throw Error(ErrorKind::Io, std::string("PGM ") + what + " too large");
        }
        if (digits == 0) throw Error(ErrorKind::Io, std::string("PGM: missing ") + what);
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw Error(ErrorKind::Io, "not a binary PGM (P5) file");
    pos = 2;
    const std::size_t w = read_uint("width");
    const std::size_t h = read_uint("height");
    const std::size_t maxval = read_uint("maxval");
    if (maxval == 0 || maxval > 255) throw Error(ErrorKind::Io, "only 8-bit PGM is supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw Error(ErrorKind::Io, "PGM: malformed header");
    ++pos;
    if (bytes.size() - pos < w * h) throw Error(ErrorKind::Io, "PGM: truncated pixel data");
    Image img(h, w, 1);
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), w * h, img.pixels.begin());
    return img;
}

inline std::vector<std::uint8_t> encode_pgm(const Image& img) {
    if (img.channels != 1) throw Error(ErrorKind::Io, "PGM needs a single-channel image");
    const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

inline Image read_pgm(const std::string& path) { return decode_pgm(read_file(path)); }
inline void write_pgm(const std::string& path, const Image& img) { write_file(path, encode_pgm(img)); }

} // namespace sd2
