// Byte-buffer aliases, hex helpers and the error taxonomy shared across the lab.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bqlab {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

struct LabError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// codec
struct BadPadding : LabError { using LabError::LabError; };
struct BadLength : LabError { using LabError::LabError; };
struct MalformedStream : LabError { using LabError::LabError; };
struct UnsupportedLevel : LabError { using LabError::LabError; };
struct InvalidBase64 : LabError { using LabError::LabError; };

// wire
struct UnknownTag : LabError { using LabError::LabError; };
struct TruncatedField : LabError { using LabError::LabError; };
struct FrameLengthMismatch : LabError { using LabError::LabError; };
struct MissingBlock : LabError {
    explicit MissingBlock(std::vector<std::uint32_t> idx)
        : LabError("missing blocks: " + joinIndexes(idx)), indexes(std::move(idx)) {}
    std::vector<std::uint32_t> indexes;

private:
    static std::string joinIndexes(const std::vector<std::uint32_t>& idx) {
        std::string out;
        for (auto i : idx) {
            if (!out.empty()) out += ',';
            out += std::to_string(i);
        }
        return out;
    }
};
struct OverlappingBlock : LabError { using LabError::LabError; };

// virtual host
struct NotFound : LabError { using LabError::LabError; };
struct NoSuchPid : LabError { using LabError::LabError; };

// geoip
struct AllProvidersFailed : LabError { using LabError::LabError; };
struct EmptyDomainList : LabError { using LabError::LabError; };

// implant / c2
struct UnknownBankCode : LabError { using LabError::LabError; };
struct ProtocolViolation : LabError { using LabError::LabError; };

// detect
struct UnsupportedConstruct : LabError { using LabError::LabError; };
struct MalformedDocument : LabError { using LabError::LabError; };

inline Bytes toBytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string toString(ByteView b) {
    return std::string(b.begin(), b.end());
}

inline std::string toHex(ByteView data) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out += digits[b >> 4];
        out += digits[b & 0xf];
    }
    return out;
}

inline Bytes fromHex(std::string_view hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (hex.size() % 2 != 0) throw LabError("hex string has odd length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = nibble(hex[i]);
        int lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw LabError("invalid hex digit");
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

} // namespace bqlab
