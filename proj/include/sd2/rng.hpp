#pragma once

// Counter-based Philox4x32-10 generator. A draw is a pure function of
// (seed, stream, index), so any substream can be replayed without carrying
// state. Normals use Box-Muller on two 53-bit uniforms per counter block.
//
// Stream split used by the sampler: stream t holds the noise z for reverse
// step t (t >= 2); stream T + 1 holds the initial x_T.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace sd2 {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

    PhiloxCounter block(std::uint64_t index) const noexcept {
        return philox4x32_10({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                              static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                             key_);
    }

    // Uniform in (0, 1]; never 0 so log() is safe.
    static double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
        const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
        return static_cast<double>(bits + 1) * 0x1.0p-53;
    }

    double uniform(std::uint64_t index) const noexcept {
        const auto b = block(index);
        return to_unit(b[0], b[1]);
    }

    /// The index-th standard normal of this stream.
    double normal(std::uint64_t index) const noexcept {
        const auto b = block(index / 2);
        const double u1 = to_unit(b[0], b[1]);
        const double u2 = to_unit(b[2], b[3]);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return index % 2 == 0 ? radius * std::cos(angle) : radius * std::sin(angle);
    }

    /// out[i] = normal(i), one counter block per pair.
    void fill_normal(std::vector<double>& out) const {
        for (std::size_t i = 0; i < out.size(); i += 2) {
            const auto b = block(i / 2);
            const double radius = std::sqrt(-2.0 * std::log(to_unit(b[0], b[1])));
            const double angle = 2.0 * std::numbers::pi * to_unit(b[2], b[3]);
            out[i] = radius * std::cos(angle);
            if (i + 1 < out.size()) out[i + 1] = radius * std::sin(angle);
        }
    }

private:
    PhiloxKey key_;
    std::uint64_t stream_;
};

} // namespace sd2
