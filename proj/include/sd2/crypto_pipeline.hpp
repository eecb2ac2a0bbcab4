#pragma once

// Scramble-then-XOR cipher driven by one chaotic sequence:
//   I2 = scramble(I, O),  I3 = I2 xor M
// and the exact inverse I = unscramble(I3 xor M, O).

#include <cstdint>
#include <span>
#include <vector>

#include "sd2/chaos_keystream.hpp"
#include "sd2/error.hpp"

namespace sd2 {

struct CipherBytes {
    std::vector<std::uint8_t> bytes;

    std::size_t size() const noexcept { return bytes.size(); }
    friend bool operator==(const CipherBytes&, const CipherBytes&) = default;
};

/// out[p[i]] = data[i]
inline std::vector<std::uint8_t> scramble(std::span<const std::uint8_t> data, const Permutation& p) {
    if (data.size() != p.size())
        throw Error(ErrorKind::LengthMismatch, "scramble: data length " + std::to_string(data.size()) +
                                                   " != permutation length " + std::to_string(p.size()));
    std::vector<std::uint8_t> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[p.forward[i]] = data[i];
    return out;
}

/// out[i] = data[p[i]]
inline std::vector<std::uint8_t> unscramble(std::span<const std::uint8_t> data, const Permutation& p) {
    if (data.size() != p.size())
        throw Error(ErrorKind::LengthMismatch, "unscramble: data length " + std::to_string(data.size()) +
                                                   " != permutation length " + std::to_string(p.size()));
    std::vector<std::uint8_t> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[p.forward[i]];
    return out;
}

inline std::vector<std::uint8_t> mask_xor(std::span<const std::uint8_t> data, const ByteKeystream& ks) {
    if (data.size() > ks.size())
        throw Error(ErrorKind::LengthMismatch, "keystream too short: " + std::to_string(ks.size()) + " < " +
                                                   std::to_string(data.size()));
    std::vector<std::uint8_t> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = static_cast<std::uint8_t>(data[i] ^ ks.bytes[i]);
    return out;
}

/// Permutation and keystream for an n-byte block, plus `extra` continuation
/// bytes of the same chaotic stream (used for padding).
struct KeyMaterial {
    Permutation order;
    ByteKeystream mask;
    ByteKeystream continuation;
};

inline KeyMaterial derive_key_material(const ChaosKey& key, std::size_t n, std::size_t extra = 0) {
    const ChaosSequence seq = generate_sequence(key, n + extra);
    std::span<const double> all(seq.values);
    ChaosSequence head{std::vector<double>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n))};
    KeyMaterial km;
    km.order = derive_permutation(head);
    km.mask = derive_byte_keystream(head);
    km.continuation = derive_byte_keystream(all.subspan(n));
    return km;
}

inline CipherBytes encrypt(std::span<const std::uint8_t> plain, const ChaosKey& key) {
    if (plain.empty()) throw Error(ErrorKind::Range, "encrypt: empty plaintext");
    const KeyMaterial km = derive_key_material(key, plain.size());
    return CipherBytes{mask_xor(scramble(plain, km.order), km.mask)};
}

inline std::vector<std::uint8_t> decrypt(std::span<const std::uint8_t> cipher, const ChaosKey& key) {
    if (cipher.empty()) throw Error(ErrorKind::Range, "decrypt: empty ciphertext");
    const KeyMaterial km = derive_key_material(key, cipher.size());
    return unscramble(mask_xor(cipher, km.mask), km.order);
}

inline std::vector<std::uint8_t> decrypt(const CipherBytes& cipher, const ChaosKey& key) {
    return decrypt(std::span<const std::uint8_t>(cipher.bytes), key);
}

} // namespace sd2
