#pragma once

// Framing of secret data into a fixed-capacity byte block:
//
//   offset 0   kind            1 byte
//   offset 1   width           4 bytes, big-endian
//   offset 5   height          4 bytes, big-endian
//   offset 9   declared_len    7 bytes, big-endian (u56)
//   offset 16  body            declared_len bytes
//   ...        padding         keystream bytes up to the capacity
//
// Bit streams are MSB-first within each byte.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sd2/chaos_keystream.hpp"
#include "sd2/error.hpp"

namespace sd2 {

enum class PayloadKind : std::uint8_t {
    GrayImage = 0,
    Text = 1,
    Audio = 2,
    RawBytes = 3,
};

inline const char* to_string(PayloadKind k) {
    switch (k) {
    case PayloadKind::GrayImage: return "gray-image";
    case PayloadKind::Text: return "text";
    case PayloadKind::Audio: return "audio";
    case PayloadKind::RawBytes: return "raw";
    }
    return "unknown";
}

inline PayloadKind parse_payload_kind(std::string_view name) {
    if (name == "gray" || name == "gray-image" || name == "pgm") return PayloadKind::GrayImage;
    if (name == "text") return PayloadKind::Text;
    if (name == "audio") return PayloadKind::Audio;
    if (name == "raw") return PayloadKind::RawBytes;
    throw Error(ErrorKind::Config, "unknown payload kind '" + std::string(name) + "'");
}

struct PayloadMeta {
    std::uint32_t width = 0;   // GrayImage only
    std::uint32_t height = 0;  // GrayImage only

    friend bool operator==(const PayloadMeta&, const PayloadMeta&) = default;
};

/// What the sender hides and the receiver gets back.
struct Payload {
    PayloadKind kind = PayloadKind::RawBytes;
    PayloadMeta meta;
    std::vector<std::uint8_t> body;

    friend bool operator==(const Payload&, const Payload&) = default;
};

inline constexpr std::size_t kHeaderBytes = 16;
inline constexpr std::uint64_t kMaxDeclaredLen = (std::uint64_t{1} << 56) - 1;

struct PayloadBlock {
    Payload payload;
    std::vector<std::uint8_t> padding;

    std::uint64_t declared_len() const noexcept { return payload.body.size(); }
    std::size_t serialized_size() const noexcept { return kHeaderBytes + payload.body.size() + padding.size(); }

    std::vector<std::uint8_t> serialize() const {
        std::vector<std::uint8_t> out;
        out.reserve(serialized_size());
        out.push_back(static_cast<std::uint8_t>(payload.kind));
        auto put_be = [&out](std::uint64_t v, int nbytes) {
            for (int i = nbytes - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        };
        put_be(payload.meta.width, 4);
        put_be(payload.meta.height, 4);
        put_be(declared_len(), 7);
        out.insert(out.end(), payload.body.begin(), payload.body.end());
        out.insert(out.end(), padding.begin(), padding.end());
        return out;
    }
};

/// Builds a block of exactly capacity_bytes; padding comes from pad_source.
inline PayloadBlock frame_payload(Payload payload, std::size_t capacity_bytes, std::span<const std::uint8_t> pad_source) {
    const std::size_t required = kHeaderBytes + payload.body.size();
    if (required > capacity_bytes) throw CapacityError(required, capacity_bytes);
    if (payload.kind != PayloadKind::GrayImage && (payload.meta.width != 0 || payload.meta.height != 0))
        throw Error(ErrorKind::Config, "width/height are only meaningful for gray-image payloads");
    if (payload.kind == PayloadKind::GrayImage &&
        std::uint64_t{payload.meta.width} * payload.meta.height != payload.body.size())
        throw Error(ErrorKind::LengthMismatch, "gray-image body does not match width x height");
    const std::size_t pad_len = capacity_bytes - required;
    if (pad_source.size() < pad_len)
        throw Error(ErrorKind::LengthMismatch, "padding source shorter than required padding");
    PayloadBlock block;
    block.payload = std::move(payload);
    block.padding.assign(pad_source.begin(), pad_source.begin() + static_cast<std::ptrdiff_t>(pad_len));
    return block;
}

inline PayloadBlock frame_payload(Payload payload, std::size_t capacity_bytes, const ByteKeystream& pad_source) {
    return frame_payload(std::move(payload), capacity_bytes, std::span<const std::uint8_t>(pad_source.bytes));
}

/// Inverse of PayloadBlock::serialize; padding is dropped.
inline Payload unframe_payload(std::span<const std::uint8_t> serialized) {
    if (serialized.size() < kHeaderBytes)
        throw Error(ErrorKind::MalformedHeader, "block shorter than the 16-byte header");
    auto get_be = [&](std::size_t off, int nbytes) {
        std::uint64_t v = 0;
        for (int i = 0; i < nbytes; ++i) v = (v << 8) | serialized[off + static_cast<std::size_t>(i)];
        return v;
    };
    const std::uint8_t tag = serialized[0];
    if (tag > static_cast<std::uint8_t>(PayloadKind::RawBytes))
        throw Error(ErrorKind::UnknownKind, "unknown payload kind tag " + std::to_string(tag));
    Payload p;
    p.kind = static_cast<PayloadKind>(tag);
    p.meta.width = static_cast<std::uint32_t>(get_be(1, 4));
    p.meta.height = static_cast<std::uint32_t>(get_be(5, 4));
    const std::uint64_t len = get_be(9, 7);
    if (len > serialized.size() - kHeaderBytes)
        throw Error(ErrorKind::MalformedHeader, "declared length " + std::to_string(len) + " exceeds the " +
                                                    std::to_string(serialized.size() - kHeaderBytes) + " available bytes");
    if (p.kind == PayloadKind::GrayImage) {
        if (std::uint64_t{p.meta.width} * p.meta.height != len)
            throw Error(ErrorKind::MalformedHeader, "gray-image dimensions disagree with declared length");
    } else if (p.meta.width != 0 || p.meta.height != 0) {
        throw Error(ErrorKind::MalformedHeader, "non-image payload carries image dimensions");
    }
    p.body.assign(serialized.begin() + kHeaderBytes, serialized.begin() + kHeaderBytes + static_cast<std::ptrdiff_t>(len));
    return p;
}

struct BitStream {
    std::vector<std::uint8_t> bits;  // each element is 0 or 1

    std::size_t size() const noexcept { return bits.size(); }
    std::uint8_t operator[](std::size_t i) const { return bits[i]; }

    friend bool operator==(const BitStream&, const BitStream&) = default;
};

inline BitStream bytes_to_bits(std::span<const std::uint8_t> bytes) {
    BitStream s;
    s.bits.reserve(bytes.size() * 8);
    for (auto b : bytes)
        for (int i = 7; i >= 0; --i) s.bits.push_back(static_cast<std::uint8_t>((b >> i) & 1u));
    return s;
}

inline std::vector<std::uint8_t> bits_to_bytes(const BitStream& s) {
    if (s.size() % 8 != 0)
        throw Error(ErrorKind::LengthMismatch, "bit stream length " + std::to_string(s.size()) + " is not a multiple of 8");
    std::vector<std::uint8_t> out(s.size() / 8, 0);
    for (std::size_t i = 0; i < s.size(); ++i)
        out[i / 8] = static_cast<std::uint8_t>(out[i / 8] | ((s.bits[i] & 1u) << (7 - i % 8)));
    return out;
}

} // namespace sd2
