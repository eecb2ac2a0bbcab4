#pragma once

// Key-driven recovery. Needs only the carrier, the key and the plan; no
// sampler state is involved.

#include <cstdint>
#include <span>
#include <vector>

#include "sd2/crypto_pipeline.hpp"
#include "sd2/error.hpp"
#include "sd2/image.hpp"
#include "sd2/payload_codec.hpp"
#include "sd2/stego_injector.hpp"

namespace sd2 {

/// Reads all planned positions (capacity_bits of them) in write order.
inline BitStream read_locked_bits(const StegoImage& img, const BitPlan& plan, std::size_t count) {
    if (img.channels != 3) throw Error(ErrorKind::DimensionMismatch, "stego image must be RGB");
    const std::size_t cap = plan.capacity_bits(img.height, img.width);
    if (count > cap) throw Error(ErrorKind::DimensionMismatch, "requested more bits than the plan holds");
    const BitLayout layout(plan);
    BitStream out;
    out.bits.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const BitSlot s = layout.slot(i);
        out.bits[i] = static_cast<std::uint8_t>((img.pixels[s.pixel * img.channels + s.channel] >> s.bit) & 1u);
    }
    return out;
}

inline BitStream read_locked_bits(const StegoImage& img, const BitPlan& plan) {
    return read_locked_bits(img, plan, plan.capacity_bits(img.height, img.width));
}

/// The full decrypted block (header, body, padding).
inline std::vector<std::uint8_t> decrypt_block(const StegoImage& img, const ChaosKey& key, const BitPlan& plan) {
    const std::size_t capacity = plan.capacity_bytes(img.height, img.width);
    if (capacity < kHeaderBytes) throw Error(ErrorKind::DimensionMismatch, "carrier too small for a payload header");
    const BitStream bits = read_locked_bits(img, plan, capacity * 8);
    return decrypt(bits_to_bytes(bits), key);
}

/// Throws MalformedHeader / UnknownKind when key, plan or carrier are wrong.
inline Payload extract_payload(const StegoImage& img, const ChaosKey& key, const BitPlan& plan) {
    return unframe_payload(decrypt_block(img, key, plan));
}

/// Body bytes [0, expected_len) without header validation.
inline std::vector<std::uint8_t> extract_raw(const StegoImage& img, const ChaosKey& key, const BitPlan& plan,
                                             std::size_t expected_len) {
    if (expected_len == 0) return {};
    const std::size_t capacity = plan.capacity_bytes(img.height, img.width);
    if (expected_len + kHeaderBytes > capacity)
        throw Error(ErrorKind::DimensionMismatch, "requested length exceeds the carrier's body capacity");
    const auto block = decrypt_block(img, key, plan);
    return std::vector<std::uint8_t>(block.begin() + kHeaderBytes,
                                     block.begin() + static_cast<std::ptrdiff_t>(kHeaderBytes + expected_len));
}

} // namespace sd2
