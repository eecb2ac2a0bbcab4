#pragma once

// Minimal lossless PNG codec on top of zlib. Writes 8-bit RGB or gray,
// non-interlaced, with only IHDR/IDAT/IEND (no gamma or color chunks, so
// pixel bytes survive storage exactly). Reads 8-bit gray/RGB/RGBA,
// non-interlaced; ancillary chunks are ignored and never alter pixels.

#include <zlib.h>

#include <array>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "sd2/error.hpp"
#include "sd2/image.hpp"

namespace sd2 {

namespace png_detail {

inline constexpr std::array<std::uint8_t, 8> kSignature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
           std::uint32_t{b[off + 3]};
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char* type, std::span<const std::uint8_t> data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t type_pos = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const uLong crc = crc32(0L, out.data() + type_pos, static_cast<uInt>(4 + data.size()));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

inline std::uint8_t paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
    if (pb <= pc) return static_cast<std::uint8_t>(b);
    return static_cast<std::uint8_t>(c);
}

} // namespace png_detail

inline std::vector<std::uint8_t> encode_png(const Image& img) {
    using namespace png_detail;
    if (img.channels != 1 && img.channels != 3) throw Error(ErrorKind::Io, "PNG writer supports gray or RGB only");
    if (img.width == 0 || img.height == 0) throw Error(ErrorKind::Io, "PNG writer: empty image");
    std::vector<std::uint8_t> out(kSignature.begin(), kSignature.end());

    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(img.width));
    put_u32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.push_back(8);                                // bit depth
    ihdr.push_back(img.channels == 3 ? 2 : 0);        // color type
    ihdr.push_back(0);                                // deflate
    ihdr.push_back(0);                                // adaptive filtering
    ihdr.push_back(0);                                // no interlace
    put_chunk(out, "IHDR", ihdr);

    // Filter type 0 on every row keeps the stream a fixed function of the pixels.
    const std::size_t stride = img.width * img.channels;
    std::vector<std::uint8_t> raw;
    raw.reserve(img.height * (stride + 1));
    for (std::size_t y = 0; y < img.height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), img.pixels.begin() + static_cast<std::ptrdiff_t>(y * stride),
                   img.pixels.begin() + static_cast<std::ptrdiff_t>((y + 1) * stride));
    }
    uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> z(zlen);
    if (compress2(z.data(), &zlen, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
        throw Error(ErrorKind::Io, "PNG writer: deflate failed");
    z.resize(zlen);
    put_chunk(out, "IDAT", z);
    put_chunk(out, "IEND", {});
    return out;
}

/// RGBA inputs are rejected rather than silently dropping alpha.
inline Image decode_png(std::span<const std::uint8_t> bytes) {
    using namespace png_detail;
    if (bytes.size() < 8 || !std::equal(kSignature.begin(), kSignature.end(), bytes.begin()))
        throw Error(ErrorKind::Io, "not a PNG file");
    std::size_t pos = 8;
    std::uint32_t width = 0, height = 0;
    std::size_t channels = 0;
    bool have_header = false, have_end = false;
    std::vector<std::uint8_t> zdata;
    while (pos + 12 <= bytes.size()) {
        const std::uint32_t len = get_u32(bytes, pos);
        if (len > bytes.size() - pos - 12) throw Error(ErrorKind::Io, "PNG: truncated chunk");
        const std::string type(reinterpret_cast<const char*>(bytes.data() + pos + 4), 4);
        auto data = bytes.subspan(pos + 8, len);
        const uLong crc = crc32(0L, bytes.data() + pos + 4, static_cast<uInt>(4 + len));
        if (static_cast<std::uint32_t>(crc) != get_u32(bytes, pos + 8 + len))
            throw Error(ErrorKind::Io, "PNG: CRC mismatch in " + type + " chunk");
        if (type == "IHDR") {
            if (len != 13) throw Error(ErrorKind::Io, "PNG: bad IHDR");
            width = get_u32(data, 0);
            height = get_u32(data, 4);
            const int depth = data[8], color = data[9], interlace = data[12];
            if (depth != 8) throw Error(ErrorKind::Io, "PNG: only 8-bit images are supported");
            if (interlace != 0) throw Error(ErrorKind::Io, "PNG: interlaced images are not supported");
            if (color == 0) channels = 1;
            else if (color == 2) channels = 3;
            else throw Error(ErrorKind::Io, "PNG: only gray or RGB color types are supported");
            if (width == 0 || height == 0) throw Error(ErrorKind::Io, "PNG: empty image");
            have_header = true;
        } else if (type == "IDAT") {
            zdata.insert(zdata.end(), data.begin(), data.end());
        } else if (type == "IEND") {
            have_end = true;
            break;
        } else if (!(type[0] & 0x20)) {
            throw Error(ErrorKind::Io, "PNG: unsupported critical chunk " + type);
        }
        pos += 12 + len;
    }
    if (!have_header || !have_end) throw Error(ErrorKind::Io, "PNG: missing IHDR or IEND");

    const std::size_t stride = std::size_t{width} * channels;
    std::vector<std::uint8_t> raw(std::size_t{height} * (stride + 1));
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &raw_len, zdata.data(), static_cast<uLong>(zdata.size())) != Z_OK || raw_len != raw.size())
        throw Error(ErrorKind::Io, "PNG: corrupt image data");

    Image img(height, width, channels);
    const std::size_t bpp = channels;
    std::vector<std::uint8_t> prev(stride, 0);
    for (std::size_t y = 0; y < height; ++y) {
        const std::uint8_t filter = raw[y * (stride + 1)];
        const std::uint8_t* in = raw.data() + y * (stride + 1) + 1;
        std::uint8_t* row = img.pixels.data() + y * stride;
        for (std::size_t i = 0; i < stride; ++i) {
            const int a = i >= bpp ? row[i - bpp] : 0;
            const int b = prev[i];
            const int c = i >= bpp ? prev[i - bpp] : 0;
            int pred = 0;
            switch (filter) {
            case 0: pred = 0; break;
            case 1: pred = a; break;
            case 2: pred = b; break;
            case 3: pred = (a + b) / 2; break;
            case 4: pred = paeth(a, b, c); break;
            default: throw Error(ErrorKind::Io, "PNG: unknown filter type " + std::to_string(filter));
            }
            row[i] = static_cast<std::uint8_t>(in[i] + pred);
        }
        std::copy_n(row, stride, prev.begin());
    }
    return img;
}

inline Image read_png(const std::string& path) { return decode_png(read_file(path)); }
inline void write_png(const std::string& path, const Image& img) { write_file(path, encode_png(img)); }

} // namespace sd2
