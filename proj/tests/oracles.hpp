// Test-side reference oracles, written from first principles (FIPS-197
// algebra, the QuickLZ stream layout, plain brute-force models) and kept
// independent of the implementation paths under include/bqlab. Keep it that
// way: tests compare the two.

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bqlab/bytes.hpp"
#include "bqlab/virtualhost.hpp"

namespace oracles {

using bqlab::Bytes;
using bqlab::ByteView;

// ---------------------------------------------------------------------------
// AES-256-CBC reference: S-box derived algebraically (GF(2^8) inverse plus the
// affine map), state kept as a row/column byte matrix, one step per function.
// ---------------------------------------------------------------------------

namespace refaes {

inline std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
    std::uint8_t product = 0;
    for (int bit = 0; bit < 8; ++bit) {
        if (b & (1 << bit)) {
            std::uint8_t shifted = a;
            for (int k = 0; k < bit; ++k)
                shifted = static_cast<std::uint8_t>((shifted << 1) ^ ((shifted & 0x80) ? 0x1b : 0));
            product ^= shifted;
        }
    }
    return product;
}

inline std::uint8_t inverse(std::uint8_t a) {
    if (a == 0) return 0;
    for (int b = 1; b < 256; ++b)
        if (mul(a, static_cast<std::uint8_t>(b)) == 1) return static_cast<std::uint8_t>(b);
    throw std::logic_error("GF(2^8) element without inverse");
}

inline std::uint8_t sbox(std::uint8_t x) {
    std::uint8_t b = inverse(x);
    auto rotl = [](std::uint8_t v, int n) {
        return static_cast<std::uint8_t>((v << n) | (v >> (8 - n)));
    };
    return static_cast<std::uint8_t>(b ^ rotl(b, 1) ^ rotl(b, 2) ^ rotl(b, 3) ^ rotl(b, 4) ^ 0x63);
}

// state[r][c]; input fills columns first, as FIPS-197 lays it out
using State = std::array<std::array<std::uint8_t, 4>, 4>;

inline State toState(const std::uint8_t* in) {
    State s{};
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) s[r][c] = in[4 * c + r];
    return s;
}

inline void fromState(const State& s, std::uint8_t* out) {
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) out[4 * c + r] = s[r][c];
}

inline void subBytes(State& s) {
    for (auto& row : s)
        for (auto& b : row) b = sbox(b);
}

inline void shiftRows(State& s) {
    for (int r = 1; r < 4; ++r) {
        std::array<std::uint8_t, 4> row;
        for (int c = 0; c < 4; ++c) row[c] = s[r][(c + r) % 4];
        s[r] = row;
    }
}

inline void mixColumns(State& s) {
    for (int c = 0; c < 4; ++c) {
        std::array<std::uint8_t, 4> col = {s[0][c], s[1][c], s[2][c], s[3][c]};
        s[0][c] = mul(col[0], 2) ^ mul(col[1], 3) ^ col[2] ^ col[3];
        s[1][c] = col[0] ^ mul(col[1], 2) ^ mul(col[2], 3) ^ col[3];
        s[2][c] = col[0] ^ col[1] ^ mul(col[2], 2) ^ mul(col[3], 3);
        s[3][c] = mul(col[0], 3) ^ col[1] ^ col[2] ^ mul(col[3], 2);
    }
}

inline void addRoundKey(State& s, const std::uint8_t* roundKey) {
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) s[r][c] ^= roundKey[4 * c + r];
}

/// 15 round keys of 16 bytes for AES-256.
inline std::vector<std::uint8_t> expandKey(ByteView key) {
    if (key.size() != 32) throw std::invalid_argument("reference oracle expects a 32-byte key");
    std::vector<std::uint8_t> w(key.begin(), key.end());
    std::uint8_t rcon = 1;
    for (int i = 8; i < 60; ++i) {
        std::uint8_t t[4] = {w[4 * (i - 1)], w[4 * (i - 1) + 1], w[4 * (i - 1) + 2],
                             w[4 * (i - 1) + 3]};
        if (i % 8 == 0) {
            std::uint8_t first = t[0];
            t[0] = static_cast<std::uint8_t>(sbox(t[1]) ^ rcon);
            t[1] = sbox(t[2]);
            t[2] = sbox(t[3]);
            t[3] = sbox(first);
            rcon = mul(rcon, 2);
        } else if (i % 8 == 4) {
            for (auto& b : t) b = sbox(b);
        }
        for (int k = 0; k < 4; ++k) w.push_back(w[4 * (i - 8) + k] ^ t[k]);
    }
    return w;
}

inline void encryptBlock(ByteView key, const std::uint8_t in[16], std::uint8_t out[16]) {
    const auto w = expandKey(key);
    State s = toState(in);
    addRoundKey(s, w.data());
    for (int round = 1; round <= 13; ++round) {
        subBytes(s);
        shiftRows(s);
        mixColumns(s);
        addRoundKey(s, w.data() + 16 * round);
    }
    subBytes(s);
    shiftRows(s);
    addRoundKey(s, w.data() + 16 * 14);
    fromState(s, out);
}

/// CBC encrypt with PKCS7, IV prepended, matching the envelope wire form.
inline Bytes sealEnvelope(ByteView plaintext, ByteView key, ByteView iv) {
    Bytes padded(plaintext.begin(), plaintext.end());
    const std::size_t pad = 16 - plaintext.size() % 16;
    padded.insert(padded.end(), pad, static_cast<std::uint8_t>(pad));

    Bytes out(iv.begin(), iv.end());
    std::uint8_t chain[16];
    std::copy(iv.begin(), iv.end(), chain);
    for (std::size_t off = 0; off < padded.size(); off += 16) {
        std::uint8_t block[16];
        for (int i = 0; i < 16; ++i) block[i] = padded[off + i] ^ chain[i];
        std::uint8_t enc[16];
        encryptBlock(key, block, enc);
        out.insert(out.end(), enc, enc + 16);
        std::copy(enc, enc + 16, chain);
    }
    return out;
}

} // namespace refaes

// ---------------------------------------------------------------------------
// QuickLZ 1.5 reference decompressor, written from the stream layout: headers,
// 32-bit control words consumed LSB-first, hash-addressed level-1 matches and
// explicit-offset level-3 matches.
// ---------------------------------------------------------------------------

namespace refqlz {

struct Stream {
    const std::uint8_t* p;
    std::size_t n;
    std::size_t pos;

    std::uint8_t byte() {
        if (pos >= n) throw std::runtime_error("oracle: stream truncated");
        return p[pos++];
    }
    std::uint32_t le(int count) {
        std::uint32_t v = 0;
        for (int i = 0; i < count; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
        return v;
    }
};

inline Bytes decompress(ByteView stream) {
    Stream in{stream.data(), stream.size(), 0};
    const std::uint8_t flags = in.byte();
    const int level = (flags >> 2) & 3;
    if (level != 1 && level != 3) throw std::runtime_error("oracle: level not 1 or 3");

    std::size_t compressedSize, decompressedSize;
    if (flags & 2) {
        compressedSize = in.le(4);
        decompressedSize = in.le(4);
    } else {
        compressedSize = in.byte();
        decompressedSize = in.byte();
    }
    if (compressedSize != stream.size()) throw std::runtime_error("oracle: bad compressed size");

    Bytes out;
    out.reserve(decompressedSize);

    if ((flags & 1) == 0) { // stored
        while (out.size() < decompressedSize) out.push_back(in.byte());
        return out;
    }

    const std::ptrdiff_t lastMatchStart = static_cast<std::ptrdiff_t>(decompressedSize) - 11;
    std::uint32_t control = 1;
    std::vector<std::uint32_t> table(4096, 0);
    std::ptrdiff_t hashed = -1;

    auto hashAt = [&](std::size_t posn) {
        const std::uint32_t f = out[posn] | out[posn + 1] << 8 | out[posn + 2] << 16;
        table[((f >> 12) ^ f) & 0xfff] = static_cast<std::uint32_t>(posn);
    };

    while (true) {
        if (control == 1) control = in.le(4);

        if (control & 1) { // match token
            control >>= 1;
            std::size_t from, length;
            if (level == 1) {
                const std::uint32_t token = in.le(2);
                const std::uint32_t bucket = (token >> 4) & 0xfff;
                length = (token & 0xf) ? (token & 0xf) + 2 : in.byte();
                from = table[bucket];
            } else {
                if (in.pos >= in.n) throw std::runtime_error("oracle: stream truncated");
                const std::uint8_t first = stream[in.pos];
                std::uint32_t token;
                std::size_t offset;
                if ((first & 3) == 0) {
                    token = in.le(1);
                    offset = token >> 2;
                    length = 3;
                } else if ((first & 2) == 0) {
                    token = in.le(2);
                    offset = token >> 2;
                    length = 3;
                } else if ((first & 1) == 0) {
                    token = in.le(2);
                    offset = (token & 0xffff) >> 6;
                    length = ((token >> 2) & 15) + 3;
                } else if ((first & 127) != 3) {
                    token = in.le(3);
                    offset = (token >> 7) & 0x1ffff;
                    length = ((token >> 2) & 0x1f) + 2;
                } else {
                    token = in.le(4);
                    offset = token >> 15;
                    length = ((token >> 7) & 255) + 3;
                }
                if (offset == 0 || offset > out.size())
                    throw std::runtime_error("oracle: bad match offset");
                from = out.size() - offset;
            }
            const std::size_t matchStart = out.size();
            for (std::size_t i = 0; i < length; ++i) out.push_back(out[from + i]);
            if (level == 1) {
                while (hashed < static_cast<std::ptrdiff_t>(matchStart)) hashAt(++hashed);
                hashed = static_cast<std::ptrdiff_t>(out.size()) - 1;
            }
        } else if (static_cast<std::ptrdiff_t>(out.size()) <= lastMatchStart) {
            control >>= 1;
            out.push_back(in.byte());
            if (level == 1)
                while (hashed + 3 < static_cast<std::ptrdiff_t>(out.size())) hashAt(++hashed);
        } else {
            while (out.size() < decompressedSize) {
                if (control == 1) {
                    in.le(4); // trailing control words carry only literal bits
                    control = 0x80000000u;
                }
                out.push_back(in.byte());
                control >>= 1;
            }
            return out;
        }
    }
}

} // namespace refqlz

// ---------------------------------------------------------------------------
// Brute-force chunking model.
// ---------------------------------------------------------------------------

struct ChunkModel {
    std::size_t blockCount;
    Bytes reassembled;
};

inline ChunkModel chunkModel(ByteView data, std::size_t maxBlock) {
    ChunkModel m;
    m.blockCount = data.empty() ? 1 : (data.size() + maxBlock - 1) / maxBlock;
    m.reassembled.assign(data.begin(), data.end());
    return m;
}

// ---------------------------------------------------------------------------
// Recursive subsequence check (ibankingRegex model).
// ---------------------------------------------------------------------------

inline bool subsequence(std::string_view needle, std::string_view hay) {
    if (needle.empty()) return true;
    if (hay.empty()) return false;
    if (needle.front() == hay.front()) return subsequence(needle.substr(1), hay.substr(1));
    return subsequence(needle, hay.substr(1));
}

// ---------------------------------------------------------------------------
// Event-sourcing replay: rebuild file/registry/process state from the log and
// compare with the live host.
// ---------------------------------------------------------------------------

struct ReplayState {
    std::map<std::string, std::pair<Bytes, bool>> files; // normalized path -> contents, hidden
    std::map<std::string, std::string> registry;         // normalized path -> data
    std::set<std::uint32_t> livePids;

    bool operator==(const ReplayState&) const = default;
};

inline std::string lowerPath(std::string s) {
    for (auto& c : s) {
        if (c == '/') c = '\\';
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return s;
}

inline ReplayState replayEvents(const std::vector<bqlab::host::HostEvent>& events,
                                const ReplayState& initial = {}) {
    namespace ev = bqlab::host::events;
    ReplayState st = initial;
    for (const auto& e : events) {
        const auto field = [&](const char* name) -> std::string {
            auto it = e.fields.find(name);
            return it == e.fields.end() ? std::string{} : it->second;
        };
        switch (e.eventId) {
            case ev::kFileWrite:
                st.files[lowerPath(field("TargetObject"))] = {
                    bqlab::base64::decode(field("Contents")), field("Hidden") == "true"};
                break;
            case ev::kFileDelete:
                st.files.erase(lowerPath(field("TargetObject")));
                break;
            case ev::kRegistrySet:
                st.registry[lowerPath(field("TargetObject"))] = field("Details");
                break;
            case ev::kRegistryDelete:
                st.registry.erase(lowerPath(field("TargetObject")));
                break;
            case ev::kProcessCreate:
                st.livePids.insert(static_cast<std::uint32_t>(std::stoul(field("ProcessId"))));
                break;
            case ev::kProcessKill:
                st.livePids.erase(static_cast<std::uint32_t>(std::stoul(field("ProcessId"))));
                break;
            default:
                break;
        }
    }
    return st;
}

inline ReplayState captureState(const bqlab::host::VirtualHost& h) {
    ReplayState st;
    for (const auto& [key, entry] : h.files()) st.files[key] = {entry.contents, entry.hidden};
    for (const auto& [key, value] : h.registry()) st.registry[key] = value.data;
    for (const auto& [pid, entry] : h.processes()) st.livePids.insert(pid);
    return st;
}

} // namespace oracles
