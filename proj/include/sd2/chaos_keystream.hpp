#pragma once

// Extended chaotic map keystream: x_{n+1} = frac(F(mu, x_n) * 2^k) with the
// Chebyshev base map F(mu, x) = cos(mu * acos(x)). One sequence drives both
// the scrambling permutation and the XOR keystream.
//
// Arithmetic is plain IEEE double. Build with -ffp-contract=off so that the
// golden vectors in the tests stay bit-exact.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sd2/error.hpp"
#include "sd2/text_map.hpp"

namespace sd2 {

enum class ChaosVariant { Chebyshev };

inline const char* to_string(ChaosVariant v) {
    switch (v) {
    case ChaosVariant::Chebyshev: return "chebyshev";
    }
    return "unknown";
}

inline ChaosVariant parse_chaos_variant(std::string_view name) {
    if (name == "chebyshev" || name == "Chebyshev") return ChaosVariant::Chebyshev;
    throw Error(ErrorKind::InvalidKey, "unknown chaos variant '" + std::string(name) + "'");
}

struct ChaosKey {
    double mu = 3.9;
    double x0 = 0.6;
    int k = 14;
    ChaosVariant variant = ChaosVariant::Chebyshev;
    // Iterates discarded before the first emitted value.
    std::size_t burn_in = 50;

    static constexpr double kMuMin = 0.0;
    static constexpr double kMuMax = 10.0;
    static constexpr int kKMin = 8;
    static constexpr int kKMax = 20;

    /// Throws InvalidKey / Domain when a field is outside its admissible range.
    void validate() const {
        if (!(mu >= kMuMin && mu <= kMuMax))
            throw Error(ErrorKind::InvalidKey, "mu must lie in [0, 10], got " + format_double(mu));
        if (k < kKMin || k > kKMax)
            throw Error(ErrorKind::InvalidKey, "k must lie in [8, 20], got " + std::to_string(k));
        if (!(x0 >= -1.0 && x0 <= 1.0))
            throw Error(ErrorKind::Domain, "x0 must lie in [-1, 1] for the Chebyshev map, got " + format_double(x0));
    }

    // Exact bit comparison; -0.0 and 0.0 are different keys.
    friend bool operator==(const ChaosKey& a, const ChaosKey& b) {
        auto bits = [](double d) { return std::bit_cast<std::uint64_t>(d); };
        return bits(a.mu) == bits(b.mu) && bits(a.x0) == bits(b.x0) && a.k == b.k &&
               a.variant == b.variant && a.burn_in == b.burn_in;
    }
};

/// Parses the key text map (fields mu, r, k, variant, burn_in).
inline ChaosKey parse_key(const TextMap& map) {
    ChaosKey key;
    key.mu = parse_double(map.require("mu"), "mu");
    key.x0 = parse_double(map.require("r"), "r");
    key.k = parse_int<int>(map.require("k"), "k");
    key.variant = parse_chaos_variant(map.get_or("variant", "chebyshev"));
    if (auto b = map.get("burn_in")) key.burn_in = parse_int<std::size_t>(*b, "burn_in");
    key.validate();
    return key;
}

inline std::string serialize_key(const ChaosKey& key) {
    TextMap map;
    map.set("mu", format_double(key.mu));
    map.set("r", format_double(key.x0));
    map.set("k", std::to_string(key.k));
    map.set("variant", to_string(key.variant));
    map.set("burn_in", std::to_string(key.burn_in));
    return map.to_string();
}

struct ChaosSequence {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

struct Permutation {
    std::vector<std::size_t> forward;

    std::size_t size() const noexcept { return forward.size(); }
    std::size_t operator[](std::size_t i) const { return forward[i]; }

    static Permutation identity(std::size_t n) {
        Permutation p;
        p.forward.resize(n);
        std::iota(p.forward.begin(), p.forward.end(), std::size_t{0});
        return p;
    }

    bool is_bijection() const {
        std::vector<bool> seen(forward.size(), false);
        for (auto idx : forward) {
            if (idx >= forward.size() || seen[idx]) return false;
            seen[idx] = true;
        }
        return true;
    }

    friend bool operator==(const Permutation&, const Permutation&) = default;
};

struct ByteKeystream {
    std::vector<std::uint8_t> bytes;

    std::size_t size() const noexcept { return bytes.size(); }
    std::uint8_t operator[](std::size_t i) const { return bytes[i]; }
};

inline double iterate_map(const ChaosKey& key, double x) {
    key.validate();
    if (!(x >= -1.0 && x <= 1.0))
        throw Error(ErrorKind::Domain, "chaos state outside [-1, 1]: " + format_double(x));
    // Scaling by 2^k and taking v - floor(v) are both exact in binary64.
    const double v = std::cos(key.mu * std::acos(x)) * std::ldexp(1.0, key.k);
    const double y = v - std::floor(v);
    // v - floor(v) can round up to 1.0 only for tiny negative v.
    return y < 1.0 ? y : 0.0;
}

/// Emits n iterates after discarding key.burn_in transient ones.
inline ChaosSequence generate_sequence(const ChaosKey& key, std::size_t n) {
    if (n == 0) throw Error(ErrorKind::Range, "sequence length must be at least 1");
    key.validate();
    ChaosSequence seq;
    seq.values.reserve(n);
    double x = key.x0;
    for (std::size_t i = 0; i < key.burn_in; ++i) x = iterate_map(key, x);
    for (std::size_t i = 0; i < n; ++i) {
        x = iterate_map(key, x);
        seq.values.push_back(x);
    }
    return seq;
}

/// forward[i] is the rank of seq[i] in a stable ascending sort.
inline Permutation derive_permutation(const ChaosSequence& seq) {
    if (seq.values.empty()) throw Error(ErrorKind::Range, "cannot derive a permutation from an empty sequence");
    std::vector<std::size_t> order(seq.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return seq.values[a] < seq.values[b]; });
    Permutation p;
    p.forward.resize(seq.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) p.forward[order[rank]] = rank;
    return p;
}

inline std::uint8_t chaos_value_to_byte(double v) {
    if (!(v >= 0.0 && v < 1.0))
        throw Error(ErrorKind::Range, "chaos value outside [0, 1): " + format_double(v));
    return static_cast<std::uint8_t>(std::min(255.0, std::floor(v * 256.0)));
}

inline ByteKeystream derive_byte_keystream(std::span<const double> values) {
    ByteKeystream ks;
    ks.bytes.reserve(values.size());
    for (double v : values) ks.bytes.push_back(chaos_value_to_byte(v));
    return ks;
}

inline ByteKeystream derive_byte_keystream(const ChaosSequence& seq) {
    return derive_byte_keystream(std::span<const double>(seq.values));
}

inline Permutation invert_permutation(const Permutation& p) {
    if (!p.is_bijection()) throw Error(ErrorKind::InvalidPermutation, "permutation is not a bijection");
    Permutation q;
    q.forward.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) q.forward[p.forward[i]] = i;
    return q;
}

struct SequenceDiagnostics {
    std::size_t samples = 0;
    std::size_t distinct_bytes = 0;
    double byte_entropy_bits = 0.0;  // Shannon entropy of the keystream histogram
    std::size_t longest_repeat = 0;  // longest run of identical consecutive iterates
    bool degenerate = false;
};

// Entropy below this (of a max 8 bits) or a repeated state flags the orbit.
inline constexpr double kLowEntropyBits = 7.0;

/// Flags low-entropy or collapsed orbits (e.g. fixed points). Does not re-key.
inline SequenceDiagnostics diagnose_sequence(const ChaosSequence& seq) {
    SequenceDiagnostics d;
    d.samples = seq.size();
    if (seq.values.empty()) return d;
    std::array<std::size_t, 256> hist{};
    for (double v : seq.values) ++hist[chaos_value_to_byte(v)];
    for (auto c : hist) {
        if (c == 0) continue;
        ++d.distinct_bytes;
        const double p = static_cast<double>(c) / static_cast<double>(seq.size());
        d.byte_entropy_bits -= p * std::log2(p);
    }
    std::size_t run = 1;
    d.longest_repeat = 1;
    for (std::size_t i = 1; i < seq.size(); ++i) {
        run = seq.values[i] == seq.values[i - 1] ? run + 1 : 1;
        d.longest_repeat = std::max(d.longest_repeat, run);
    }
    const double expected_entropy = std::min(8.0, std::log2(static_cast<double>(seq.size())));
    d.degenerate = d.longest_repeat > 2 || d.byte_entropy_bits < std::min(kLowEntropyBits, expected_entropy - 1.0);
    return d;
}

} // namespace sd2
