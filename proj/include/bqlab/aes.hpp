// AES-256 block cipher with CBC mode and PKCS7 padding.
// Table-driven rounds; round tables are derived from the S-box at first use.

#pragma once

#include <array>
#include <cstring>

#include "bqlab/bytes.hpp"

namespace bqlab::aes {

namespace detail {

inline constexpr std::uint8_t kSbox[256] = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
};

inline constexpr std::uint8_t gmul(std::uint8_t a, std::uint8_t b) {
    std::uint8_t r = 0;
    while (b) {
        if (b & 1) r ^= a;
        bool hi = a & 0x80;
        a = static_cast<std::uint8_t>(a << 1);
        if (hi) a ^= 0x1b;
        b >>= 1;
    }
    return r;
}

struct Tables {
    std::uint8_t invSbox[256];
    std::uint32_t te[4][256]; // SubBytes+ShiftRows+MixColumns folded, per input row
    std::uint32_t td[4][256]; // inverse counterpart over the inverse S-box

    Tables() {
        for (int i = 0; i < 256; ++i) invSbox[kSbox[i]] = static_cast<std::uint8_t>(i);
        auto rotr8 = [](std::uint32_t w) { return w >> 8 | w << 24; };
        for (int x = 0; x < 256; ++x) {
            std::uint8_t s = kSbox[x];
            std::uint32_t w = static_cast<std::uint32_t>(gmul(s, 2)) << 24 |
                              static_cast<std::uint32_t>(s) << 16 |
                              static_cast<std::uint32_t>(s) << 8 | gmul(s, 3);
            for (int r = 0; r < 4; ++r) {
                te[r][x] = w;
                w = rotr8(w);
            }
            std::uint8_t is = invSbox[x];
            std::uint32_t v = static_cast<std::uint32_t>(gmul(is, 14)) << 24 |
                              static_cast<std::uint32_t>(gmul(is, 9)) << 16 |
                              static_cast<std::uint32_t>(gmul(is, 13)) << 8 | gmul(is, 11);
            for (int r = 0; r < 4; ++r) {
                td[r][x] = v;
                v = rotr8(v);
            }
        }
    }
};

inline const Tables& tables() {
    static const Tables t;
    return t;
}

inline std::uint32_t invMixColumnsWord(std::uint32_t w) {
    std::uint8_t a0 = static_cast<std::uint8_t>(w >> 24), a1 = static_cast<std::uint8_t>(w >> 16),
                 a2 = static_cast<std::uint8_t>(w >> 8), a3 = static_cast<std::uint8_t>(w);
    auto m = [](std::uint8_t v, std::uint8_t c) { return gmul(v, c); };
    return static_cast<std::uint32_t>(m(a0, 14) ^ m(a1, 11) ^ m(a2, 13) ^ m(a3, 9)) << 24 |
           static_cast<std::uint32_t>(m(a0, 9) ^ m(a1, 14) ^ m(a2, 11) ^ m(a3, 13)) << 16 |
           static_cast<std::uint32_t>(m(a0, 13) ^ m(a1, 9) ^ m(a2, 14) ^ m(a3, 11)) << 8 |
           static_cast<std::uint32_t>(m(a0, 11) ^ m(a1, 13) ^ m(a2, 9) ^ m(a3, 14));
}

} // namespace detail

inline constexpr std::size_t kBlockSize = 16;
inline constexpr std::size_t kKeySize = 32;
inline constexpr int kRounds = 14;

/// Expanded AES-256 key schedule (encrypt and decrypt directions).
class KeySchedule {
public:
    explicit KeySchedule(ByteView key) {
        if (key.size() != kKeySize) throw BadLength("AES-256 key must be 32 bytes");
        const auto& sb = detail::kSbox;

        auto subWord = [&](std::uint32_t w) {
            return static_cast<std::uint32_t>(sb[w >> 24]) << 24 |
                   static_cast<std::uint32_t>(sb[w >> 16 & 0xff]) << 16 |
                   static_cast<std::uint32_t>(sb[w >> 8 & 0xff]) << 8 | sb[w & 0xff];
        };

        for (int i = 0; i < 8; ++i)
            enc_[i] = static_cast<std::uint32_t>(key[4 * i]) << 24 |
                      static_cast<std::uint32_t>(key[4 * i + 1]) << 16 |
                      static_cast<std::uint32_t>(key[4 * i + 2]) << 8 | key[4 * i + 3];

        std::uint32_t rcon = 1;
        for (int i = 8; i < 60; ++i) {
            std::uint32_t t = enc_[i - 1];
            if (i % 8 == 0) {
                t = subWord(t << 8 | t >> 24) ^ (rcon << 24);
                rcon = detail::gmul(static_cast<std::uint8_t>(rcon), 2);
            } else if (i % 8 == 4) {
                t = subWord(t);
            }
            enc_[i] = enc_[i - 8] ^ t;
        }

        // Equivalent inverse cipher: reversed schedule, InvMixColumns on middle rounds.
        for (int r = 0; r <= kRounds; ++r)
            for (int c = 0; c < 4; ++c) {
                std::uint32_t w = enc_[4 * (kRounds - r) + c];
                dec_[4 * r + c] = (r == 0 || r == kRounds) ? w : detail::invMixColumnsWord(w);
            }
    }

    const std::uint32_t* enc() const { return enc_.data(); }
    const std::uint32_t* dec() const { return dec_.data(); }

private:
    std::array<std::uint32_t, 60> enc_{};
    std::array<std::uint32_t, 60> dec_{};
};

namespace detail {

inline void loadBlock(const std::uint8_t* in, std::uint32_t col[4]) {
    for (int c = 0; c < 4; ++c)
        col[c] = static_cast<std::uint32_t>(in[4 * c]) << 24 |
                 static_cast<std::uint32_t>(in[4 * c + 1]) << 16 |
                 static_cast<std::uint32_t>(in[4 * c + 2]) << 8 | in[4 * c + 3];
}

inline void storeBlock(const std::uint32_t col[4], std::uint8_t* out) {
    for (int c = 0; c < 4; ++c) {
        out[4 * c] = static_cast<std::uint8_t>(col[c] >> 24);
        out[4 * c + 1] = static_cast<std::uint8_t>(col[c] >> 16);
        out[4 * c + 2] = static_cast<std::uint8_t>(col[c] >> 8);
        out[4 * c + 3] = static_cast<std::uint8_t>(col[c]);
    }
}

} // namespace detail

inline void encryptBlock(const KeySchedule& ks, const std::uint8_t in[16], std::uint8_t out[16]) {
    const auto& t = detail::tables();
    const std::uint32_t* rk = ks.enc();
    std::uint32_t s[4], n[4];
    detail::loadBlock(in, s);
    for (int c = 0; c < 4; ++c) s[c] ^= rk[c];

    for (int r = 1; r < kRounds; ++r) {
        rk += 4;
        for (int c = 0; c < 4; ++c)
            n[c] = t.te[0][s[c] >> 24] ^ t.te[1][s[(c + 1) & 3] >> 16 & 0xff] ^
                   t.te[2][s[(c + 2) & 3] >> 8 & 0xff] ^ t.te[3][s[(c + 3) & 3] & 0xff] ^ rk[c];
        std::memcpy(s, n, sizeof s);
    }

    rk += 4;
    for (int c = 0; c < 4; ++c)
        n[c] = (static_cast<std::uint32_t>(detail::kSbox[s[c] >> 24]) << 24 |
                static_cast<std::uint32_t>(detail::kSbox[s[(c + 1) & 3] >> 16 & 0xff]) << 16 |
                static_cast<std::uint32_t>(detail::kSbox[s[(c + 2) & 3] >> 8 & 0xff]) << 8 |
                detail::kSbox[s[(c + 3) & 3] & 0xff]) ^
               rk[c];
    detail::storeBlock(n, out);
}

inline void decryptBlock(const KeySchedule& ks, const std::uint8_t in[16], std::uint8_t out[16]) {
    const auto& t = detail::tables();
    const std::uint32_t* rk = ks.dec();
    std::uint32_t s[4], n[4];
    detail::loadBlock(in, s);
    for (int c = 0; c < 4; ++c) s[c] ^= rk[c];

    for (int r = 1; r < kRounds; ++r) {
        rk += 4;
        for (int c = 0; c < 4; ++c)
            n[c] = t.td[0][s[c] >> 24] ^ t.td[1][s[(c + 3) & 3] >> 16 & 0xff] ^
                   t.td[2][s[(c + 2) & 3] >> 8 & 0xff] ^ t.td[3][s[(c + 1) & 3] & 0xff] ^ rk[c];
        std::memcpy(s, n, sizeof s);
    }

    rk += 4;
    for (int c = 0; c < 4; ++c)
        n[c] = (static_cast<std::uint32_t>(t.invSbox[s[c] >> 24]) << 24 |
                static_cast<std::uint32_t>(t.invSbox[s[(c + 3) & 3] >> 16 & 0xff]) << 16 |
                static_cast<std::uint32_t>(t.invSbox[s[(c + 2) & 3] >> 8 & 0xff]) << 8 |
                t.invSbox[s[(c + 1) & 3] & 0xff]) ^
               rk[c];
    detail::storeBlock(n, out);
}

/// CBC encrypt with PKCS7 padding. Output is ciphertext only (no IV).
inline Bytes cbcEncrypt(ByteView plaintext, ByteView key, ByteView iv) {
    if (iv.size() != kBlockSize) throw BadLength("IV must be 16 bytes");
    KeySchedule ks(key);

    std::size_t pad = kBlockSize - plaintext.size() % kBlockSize;
    Bytes padded(plaintext.begin(), plaintext.end());
    padded.insert(padded.end(), pad, static_cast<std::uint8_t>(pad));

    Bytes out(padded.size());
    std::uint8_t chain[kBlockSize];
    std::memcpy(chain, iv.data(), kBlockSize);
    for (std::size_t off = 0; off < padded.size(); off += kBlockSize) {
        std::uint8_t block[kBlockSize];
        for (std::size_t i = 0; i < kBlockSize; ++i) block[i] = padded[off + i] ^ chain[i];
        encryptBlock(ks, block, out.data() + off);
        std::memcpy(chain, out.data() + off, kBlockSize);
    }
    return out;
}

/// CBC decrypt with PKCS7 validation. Throws BadPadding on invalid padding,
/// BadLength when the ciphertext is empty or not block-aligned.
inline Bytes cbcDecrypt(ByteView ciphertext, ByteView key, ByteView iv) {
    if (iv.size() != kBlockSize) throw BadLength("IV must be 16 bytes");
    if (ciphertext.empty() || ciphertext.size() % kBlockSize != 0)
        throw BadLength("ciphertext length must be a positive multiple of 16");
    KeySchedule ks(key);

    Bytes out(ciphertext.size());
    std::uint8_t chain[kBlockSize];
    std::memcpy(chain, iv.data(), kBlockSize);
    for (std::size_t off = 0; off < ciphertext.size(); off += kBlockSize) {
        std::uint8_t block[kBlockSize];
        decryptBlock(ks, ciphertext.data() + off, block);
        for (std::size_t i = 0; i < kBlockSize; ++i) out[off + i] = block[i] ^ chain[i];
        std::memcpy(chain, ciphertext.data() + off, kBlockSize);
    }

    std::uint8_t pad = out.back();
    if (pad == 0 || pad > kBlockSize) throw BadPadding("invalid PKCS7 padding byte");
    for (std::size_t i = out.size() - pad; i < out.size(); ++i)
        if (out[i] != pad) throw BadPadding("inconsistent PKCS7 padding");
    out.resize(out.size() - pad);
    return out;
}

} // namespace bqlab::aes
