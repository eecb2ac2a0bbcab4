#pragma once

// Bit-position locking inside the reverse diffusion loop.
//
// Bit layout (shared with the extractor): pixels in row-major order; within a
// pixel R, then G, then B; within a channel the locked low bits are written
// from the highest locked bit down to bit 0. Payload bits are consumed
// MSB-first, so the (3,3,2) plan puts one payload byte per pixel:
//   R[2:0] <- b7 b6 b5,  G[2:0] <- b4 b3 b2,  B[1:0] <- b1 b0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "sd2/crypto_pipeline.hpp"
#include "sd2/diffusion_core.hpp"
#include "sd2/error.hpp"
#include "sd2/image.hpp"
#include "sd2/payload_codec.hpp"
#include "sd2/text_map.hpp"

namespace sd2 {

inline constexpr int kMaxLockedBits = 4;

/// Which reverse steps get a locking pass. Step t means the freshly computed
/// x_{t-1} is locked right after reverse step t.
struct InterventionSchedule {
    int modulus = 100;   // every t with t % modulus == 0 inside the range; 0 disables
    int range_lo = 1;
    int range_hi = 0;    // 0 means T
    int tail_steps = 5;  // t = tail_steps .. 1
    std::vector<int> extra;
    bool final_lock = true;  // lock x_0 after the last step

    std::set<int> resolve(int steps) const {
        std::set<int> out;
        const int hi = range_hi <= 0 ? steps : std::min(range_hi, steps);
        if (modulus > 0)
            for (int t = std::max(1, range_lo); t <= hi; ++t)
                if (t % modulus == 0) out.insert(t);
        for (int t = 1; t <= std::min(tail_steps, steps); ++t) out.insert(t);
        for (int t : extra)
            if (t >= 1 && t <= steps) out.insert(t);
        return out;
    }

    static InterventionSchedule none() {
        InterventionSchedule s;
        s.modulus = 0;
        s.tail_steps = 0;
        s.final_lock = false;
        return s;
    }
};

enum class PixelOrder { RowMajor };

// Whole-image locks every planned position at each intervention step;
// SingleBit advances one bit per step (the literal per-step form), with the
// final lock still writing everything.
enum class InjectionMode { WholeImage, SingleBit };

struct BitPlan {
    std::array<int, 3> bits_per_channel{3, 3, 2};
    PixelOrder pixel_order = PixelOrder::RowMajor;
    InterventionSchedule schedule;
    InjectionMode mode = InjectionMode::WholeImage;

    void validate() const {
        int total = 0;
        for (int n : bits_per_channel) {
            if (n < 0 || n > kMaxLockedBits)
                throw Error(ErrorKind::InvalidPlan, "bits per channel must lie in [0, 4]");
            total += n;
        }
        if (total < 1) throw Error(ErrorKind::InvalidPlan, "plan locks no bits");
    }

    int bits_per_pixel() const noexcept {
        return bits_per_channel[0] + bits_per_channel[1] + bits_per_channel[2];
    }
    int max_locked_bits() const noexcept {
        return *std::max_element(bits_per_channel.begin(), bits_per_channel.end());
    }
    std::size_t capacity_bits(std::size_t h, std::size_t w) const noexcept {
        return h * w * static_cast<std::size_t>(bits_per_pixel());
    }
    std::size_t capacity_bytes(std::size_t h, std::size_t w) const noexcept { return capacity_bits(h, w) / 8; }

    static BitPlan uniform(int n) {
        BitPlan p;
        p.bits_per_channel = {n, n, n};
        return p;
    }
};

inline BitPlan parse_plan(const TextMap& map) {
    BitPlan plan;
    if (auto v = map.get("bits_per_channel")) {
        auto parts = split_list(*v);
        if (parts.size() != 3) throw Error(ErrorKind::Config, "bits_per_channel needs three values (R,G,B)");
        for (std::size_t c = 0; c < 3; ++c) plan.bits_per_channel[c] = parse_int<int>(parts[c], "bits_per_channel");
    }
    const std::string order = map.get_or("pixel_order", "row-major");
    if (order != "row-major") throw Error(ErrorKind::Config, "unsupported pixel order '" + order + "'");
    const std::string quant = map.get_or("quantize", "affine-127.5");
    if (quant != "affine-127.5") throw Error(ErrorKind::Config, "unsupported quantize rule '" + quant + "'");
    const std::string mode = map.get_or("mode", "whole-image");
    if (mode == "whole-image") plan.mode = InjectionMode::WholeImage;
    else if (mode == "single-bit") plan.mode = InjectionMode::SingleBit;
    else throw Error(ErrorKind::Config, "unknown injection mode '" + mode + "'");

    auto& s = plan.schedule;
    if (auto v = map.get("schedule.modulus")) s.modulus = parse_int<int>(*v, "schedule.modulus");
    if (auto v = map.get("schedule.range")) {
        // "lo..hi", hi may be "T"
        auto dots = v->find("..");
        if (dots == std::string::npos) throw Error(ErrorKind::Config, "schedule.range must look like lo..hi");
        s.range_lo = parse_int<int>(v->substr(0, dots), "schedule.range");
        const std::string hi = std::string(TextMap::trim(v->substr(dots + 2)));
        s.range_hi = hi == "T" ? 0 : parse_int<int>(hi, "schedule.range");
    }
    if (auto v = map.get("schedule.tail_steps")) s.tail_steps = parse_int<int>(*v, "schedule.tail_steps");
    if (auto v = map.get("schedule.extra"))
        for (const auto& item : split_list(*v)) s.extra.push_back(parse_int<int>(item, "schedule.extra"));
    if (auto v = map.get("schedule.final_lock")) s.final_lock = parse_bool(*v, "schedule.final_lock");
    plan.validate();
    return plan;
}

inline std::string serialize_plan(const BitPlan& plan) {
    TextMap map;
    const auto& b = plan.bits_per_channel;
    map.set("bits_per_channel", std::to_string(b[0]) + "," + std::to_string(b[1]) + "," + std::to_string(b[2]));
    map.set("pixel_order", "row-major");
    map.set("quantize", "affine-127.5");
    map.set("mode", plan.mode == InjectionMode::WholeImage ? "whole-image" : "single-bit");
    const auto& s = plan.schedule;
    map.set("schedule.modulus", std::to_string(s.modulus));
    map.set("schedule.range", std::to_string(s.range_lo) + ".." + (s.range_hi <= 0 ? std::string("T") : std::to_string(s.range_hi)));
    map.set("schedule.tail_steps", std::to_string(s.tail_steps));
    std::string extra;
    for (std::size_t i = 0; i < s.extra.size(); ++i) extra += (i ? "," : "") + std::to_string(s.extra[i]);
    map.set("schedule.extra", extra);
    map.set("schedule.final_lock", s.final_lock ? "true" : "false");
    return map.to_string();
}

// Latent range [-1, 1] <-> [0, 255].
inline std::uint8_t quantize_value(double v) {
    const double u = std::round((v + 1.0) * 127.5);
    return static_cast<std::uint8_t>(std::clamp(u, 0.0, 255.0));
}

inline double dequantize_value(std::uint8_t u) { return static_cast<double>(u) / 127.5 - 1.0; }

inline Image quantize(const Latent& x) {
    Image img(x.height, x.width, x.channels);
    for (std::size_t i = 0; i < x.size(); ++i) img.pixels[i] = quantize_value(x.data[i]);
    return img;
}

inline Latent dequantize(const Image& img) {
    Latent x(img.height, img.width, img.channels);
    for (std::size_t i = 0; i < img.size(); ++i) x.data[i] = dequantize_value(img.pixels[i]);
    return x;
}

/// Position of stream bit `index` under the plan: (pixel, channel, bit).
struct BitSlot {
    std::size_t pixel;
    std::size_t channel;
    int bit;
};

class BitLayout {
public:
    explicit BitLayout(const BitPlan& plan) : counts_(plan.bits_per_channel) {
        plan.validate();
        per_pixel_ = static_cast<std::size_t>(plan.bits_per_pixel());
        std::size_t k = 0;
        for (std::size_t c = 0; c < 3; ++c)
            for (int j = counts_[c] - 1; j >= 0; --j) within_[k++] = {c, j};
    }

    BitSlot slot(std::size_t index) const {
        const auto& [channel, bit] = within_[index % per_pixel_];
        return {index / per_pixel_, channel, bit};
    }

    std::size_t bits_per_pixel() const noexcept { return per_pixel_; }

private:
    struct Local {
        std::size_t channel;
        int bit;
    };
    std::array<int, 3> counts_;
    std::array<Local, 3 * kMaxLockedBits> within_{};
    std::size_t per_pixel_ = 0;
};

inline void write_bit(Image& img, const BitSlot& s, std::uint8_t bit) {
    auto& v = img.pixels[s.pixel * img.channels + s.channel];
    const auto mask = static_cast<std::uint8_t>(1u << s.bit);
    v = static_cast<std::uint8_t>((v & ~mask) | ((bit & 1u) << s.bit));
}

/// Locks every bit of `bits` into the image (already quantized).
inline void lock_bits(Image& img, const BitStream& bits, const BitPlan& plan) {
    if (img.channels != 3) throw Error(ErrorKind::DimensionMismatch, "bit locking needs an RGB image");
    const std::size_t cap = plan.capacity_bits(img.height, img.width);
    if (bits.size() > cap) throw CapacityError((bits.size() + 7) / 8, cap / 8);
    const BitLayout layout(plan);
    for (std::size_t i = 0; i < bits.size(); ++i) write_bit(img, layout.slot(i), bits[i]);
}

/// (3,3,2) split of one payload byte into an RGB triple.
inline std::array<std::uint8_t, 3> lock_bits_pixel(std::array<std::uint8_t, 3> rgb, std::uint8_t byte) {
    rgb[0] = static_cast<std::uint8_t>((rgb[0] & ~0x07u) | (byte >> 5));
    rgb[1] = static_cast<std::uint8_t>((rgb[1] & ~0x07u) | ((byte >> 2) & 0x07u));
    rgb[2] = static_cast<std::uint8_t>((rgb[2] & ~0x03u) | (byte & 0x03u));
    return rgb;
}

/// quantize -> lock -> dequantize. Idempotent.
inline Latent inject(const Latent& x, const BitStream& bits, const BitPlan& plan) {
    if (x.channels != 3) throw Error(ErrorKind::ShapeMismatch, "injection needs a 3-channel latent");
    Image img = quantize(x);
    lock_bits(img, bits, plan);
    return dequantize(img);
}

/// Locks only stream bit `index`, touching one latent element.
inline void inject_single_bit(Latent& x, const BitStream& bits, std::size_t index, const BitPlan& plan) {
    if (index >= bits.size()) return;
    const BitSlot s = BitLayout(plan).slot(index);
    double& v = x.data[s.pixel * x.channels + s.channel];
    auto u = quantize_value(v);
    const auto mask = static_cast<std::uint8_t>(1u << s.bit);
    u = static_cast<std::uint8_t>((u & ~mask) | ((bits[index] & 1u) << s.bit));
    v = dequantize_value(u);
}

struct CarrierShape {
    std::size_t height = 64;
    std::size_t width = 64;
};

/// Frames the payload to fill the carrier and encrypts it. Padding is the
/// continuation of the key's chaotic stream past the block.
inline CipherBytes prepare_cipher(const ChaosKey& key, Payload payload, const BitPlan& plan, CarrierShape shape) {
    plan.validate();
    const std::size_t capacity = plan.capacity_bytes(shape.height, shape.width);
    const std::size_t required = kHeaderBytes + payload.body.size();
    if (required > capacity) throw CapacityError(required, capacity);
    const KeyMaterial km = derive_key_material(key, capacity, capacity - required);
    const PayloadBlock block = frame_payload(std::move(payload), capacity, km.continuation);
    const std::vector<std::uint8_t> plain = block.serialize();
    return CipherBytes{mask_xor(scramble(plain, km.order), km.mask)};
}

/// Encrypts the payload and samples a carrier whose locked bits hold it.
template <Denoiser D>
StegoImage generate_stego(const ChaosKey& key, Payload payload, const D& den, const NoiseSchedule& s,
                          const BitPlan& plan, std::uint64_t seed, CarrierShape shape) {
    const CipherBytes cipher = prepare_cipher(key, std::move(payload), plan, shape);
    const BitStream bits = bytes_to_bits(cipher.bytes);
    const std::set<int> steps = plan.schedule.resolve(s.steps());
    std::size_t cursor = 0;
    StepHook hook = [&](Latent& x, int t) {
        if (!steps.count(t)) return;
        if (plan.mode == InjectionMode::WholeImage) x = inject(x, bits, plan);
        else inject_single_bit(x, bits, cursor++, plan);
    };
    Latent x0 = sample(den, s, seed, shape.height, shape.width, 3, hook);
    if (plan.schedule.final_lock) x0 = inject(x0, bits, plan);
    return quantize(x0);
}

} // namespace sd2
