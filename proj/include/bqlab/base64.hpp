// Standard Base64 (RFC 4648, padded alphabet) used by the exfil document and the
// dormant encrypt/decrypt helpers.

#pragma once

#include <array>

#include "bqlab/bytes.hpp"

namespace bqlab::base64 {

namespace detail {
inline constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::array<std::int8_t, 256> buildReverse() {
    std::array<std::int8_t, 256> rev{};
    rev.fill(-1);
    for (int i = 0; i < 64; ++i) rev[static_cast<unsigned char>(kAlphabet[i])] = static_cast<std::int8_t>(i);
    return rev;
}
} // namespace detail

inline std::string encode(ByteView data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        std::uint32_t n = data[i] << 16 | data[i + 1] << 8 | data[i + 2];
        out += detail::kAlphabet[n >> 18 & 63];
        out += detail::kAlphabet[n >> 12 & 63];
        out += detail::kAlphabet[n >> 6 & 63];
        out += detail::kAlphabet[n & 63];
    }
    std::size_t rest = data.size() - i;
    if (rest == 1) {
        std::uint32_t n = data[i] << 16;
        out += detail::kAlphabet[n >> 18 & 63];
        out += detail::kAlphabet[n >> 12 & 63];
        out += "==";
    } else if (rest == 2) {
        std::uint32_t n = data[i] << 16 | data[i + 1] << 8;
        out += detail::kAlphabet[n >> 18 & 63];
        out += detail::kAlphabet[n >> 12 & 63];
        out += detail::kAlphabet[n >> 6 & 63];
        out += '=';
    }
    return out;
}

inline std::string encode(std::string_view s) {
    return encode(ByteView{reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

inline Bytes decode(std::string_view text) {
    static const auto rev = detail::buildReverse();
    if (text.size() % 4 != 0) throw InvalidBase64("length not a multiple of 4");
    Bytes out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        std::uint32_t n = 0;
        for (int k = 0; k < 4; ++k) {
            char c = text[i + k];
            if (c == '=') {
                // padding may only appear in the final one or two positions
                if (i + 4 != text.size() || k < 2) throw InvalidBase64("misplaced padding");
                ++pad;
                n <<= 6;
                continue;
            }
            if (pad > 0) throw InvalidBase64("data after padding");
            std::int8_t v = rev[static_cast<unsigned char>(c)];
            if (v < 0) throw InvalidBase64(std::string("invalid character '") + c + "'");
            n = n << 6 | static_cast<std::uint32_t>(v);
        }
        out.push_back(static_cast<std::uint8_t>(n >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(n >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(n));
    }
    return out;
}

} // namespace bqlab::base64
