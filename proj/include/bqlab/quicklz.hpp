// QuickLZ 1.5 stream codec, levels 1 and 3 only, streaming mode disabled.
//
// Layout: flag byte (bit0 compressed, bit1 long header, bits2-3 level, bit6 set),
// then compressed and decompressed sizes (4-byte little-endian fields in the long
// form, 1-byte fields in the short form), then the token stream. Compressed bodies
// are sequences of 32-bit little-endian control words whose bits select literal
// or match tokens, consumed LSB first with a sentinel MSB. Level 1 match tokens
// carry a 12-bit hash bucket instead of an offset; the decoder rebuilds the same
// hash table over its output to resolve them. Level 3 tokens carry explicit
// offsets in one of five variable-width encodings.
//
// Compression always emits the long header. Decompression accepts both forms and
// validates sizes, token bounds and level bits.

#pragma once

#include <cstring>
#include <limits>

#include "bqlab/bytes.hpp"

namespace bqlab::quicklz {

enum class Level : int { L1 = 1, L3 = 3 };

namespace detail {

inline constexpr std::size_t kHashValues = 4096;
inline constexpr std::size_t kMinOffset = 2;
inline constexpr std::size_t kUnconditionalMatchLen = 6;
inline constexpr std::size_t kUncompressedEnd = 4;
inline constexpr std::size_t kCwordLen = 4;
inline constexpr std::size_t kHeaderLen = 9;
inline constexpr int kPointers3 = 16;

// Worst-case growth of the working buffer before the incompressible bail-out
// kicks in; same constant the reference streams reserve.
inline constexpr std::size_t kMaxExpansion = 400;

inline std::uint32_t hash3(std::uint32_t fetch) {
    return ((fetch >> 12) ^ fetch) & (kHashValues - 1);
}

inline std::uint32_t read3(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16;
}

inline void writeLE(std::uint8_t* p, std::uint32_t v, int n) {
    for (int i = 0; i < n; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

inline Bytes storedStream(ByteView data, Level level) {
    Bytes out(kHeaderLen + data.size());
    out[0] = static_cast<std::uint8_t>(2 | (static_cast<int>(level) << 2) | 0x40);
    writeLE(out.data() + 1, static_cast<std::uint32_t>(out.size()), 4);
    writeLE(out.data() + 5, static_cast<std::uint32_t>(data.size()), 4);
    if (!data.empty()) std::memcpy(out.data() + kHeaderLen, data.data(), data.size());
    return out;
}

} // namespace detail

inline Bytes compress(ByteView source, Level level) {
    using namespace detail;

    const std::size_t size = source.size();
    if (size > std::numeric_limits<std::uint32_t>::max() - kMaxExpansion)
        throw BadLength("input too large for a QuickLZ stream");
    if (size == 0) return storedStream(source, level);

    const std::uint8_t* src_p = source.data();
    Bytes destination(size + kMaxExpansion + kHeaderLen + kCwordLen);
    std::uint8_t* dst_p = destination.data();

    std::size_t src = 0;
    std::size_t dst = kHeaderLen + kCwordLen;
    std::size_t cwordPtr = kHeaderLen;
    std::uint32_t cwordVal = 0x80000000u;

    // last position where a match may start; matches never cover the final bytes
    const std::ptrdiff_t lastMatchStart =
        static_cast<std::ptrdiff_t>(size) -
        static_cast<std::ptrdiff_t>(kUnconditionalMatchLen + kUncompressedEnd + 1);

    std::uint32_t hashtable1[kHashValues] = {};
    std::uint32_t cachetable[kHashValues] = {};
    std::uint8_t hashCounter[kHashValues] = {};
    std::vector<std::uint32_t> hashtable3;
    if (level == Level::L3) hashtable3.assign(kHashValues * kPointers3, 0);

    std::uint32_t fetch = 0;
    std::size_t lits = 0;
    if (static_cast<std::ptrdiff_t>(src) <= lastMatchStart) fetch = read3(src_p + src);

    while (static_cast<std::ptrdiff_t>(src) <= lastMatchStart) {
        if ((cwordVal & 1) == 1) {
            // incompressible input: give up and store the raw bytes
            if (src > 3 * (size >> 2) && dst > src - (src >> 5)) return storedStream(source, level);
            writeLE(dst_p + cwordPtr, (cwordVal >> 1) | 0x80000000u, 4);
            cwordPtr = dst;
            dst += kCwordLen;
            cwordVal = 0x80000000u;
        }

        if (level == Level::L1) {
            const std::uint32_t hash = hash3(fetch);
            const std::size_t o = hashtable1[hash];
            const std::uint32_t cache = cachetable[hash] ^ fetch;
            cachetable[hash] = fetch;
            hashtable1[hash] = static_cast<std::uint32_t>(src);

            if (cache == 0 && hashCounter[hash] != 0 &&
                (src - o > kMinOffset ||
                 (src == o + 1 && lits >= 3 && src > 3 && src_p[src] == src_p[src - 3] &&
                  src_p[src] == src_p[src - 2] && src_p[src] == src_p[src - 1] &&
                  src_p[src] == src_p[src + 1] && src_p[src] == src_p[src + 2]))) {
                cwordVal = (cwordVal >> 1) | 0x80000000u;
                if (src_p[o + 3] != src_p[src + 3]) {
                    const std::uint32_t f = 1 | (hash << 4);
                    writeLE(dst_p + dst, f, 2);
                    src += 3;
                    dst += 2;
                } else {
                    const std::size_t oldSrc = src;
                    const std::size_t remaining =
                        std::min<std::size_t>(255, size - kUncompressedEnd - src);
                    src += 4;
                    if (src_p[o + src - oldSrc] == src_p[src]) {
                        ++src;
                        if (src_p[o + src - oldSrc] == src_p[src]) {
                            ++src;
                            while (src_p[o + (src - oldSrc)] == src_p[src] &&
                                   (src - oldSrc) < remaining)
                                ++src;
                        }
                    }
                    const std::size_t matchlen = src - oldSrc;
                    if (matchlen < 18) {
                        const std::uint32_t f =
                            (hash << 4) | static_cast<std::uint32_t>(matchlen - 2);
                        writeLE(dst_p + dst, f, 2);
                        dst += 2;
                    } else {
                        const std::uint32_t f =
                            (hash << 4) | (static_cast<std::uint32_t>(matchlen) << 16);
                        writeLE(dst_p + dst, f, 3);
                        dst += 3;
                    }
                }
                fetch = read3(src_p + src);
                lits = 0;
            } else {
                ++lits;
                hashCounter[hash] = 1;
                dst_p[dst++] = src_p[src++];
                cwordVal >>= 1;
                fetch = ((fetch >> 8) & 0xffff) | (static_cast<std::uint32_t>(src_p[src + 2]) << 16);
            }
        } else {
            fetch = read3(src_p + src);
            const std::uint32_t hash = hash3(fetch);
            std::uint8_t counter = hashCounter[hash];

            std::size_t matchlen = 0;
            std::size_t offset2 = 0;
            const std::size_t remaining = std::min<std::size_t>(255, size - kUncompressedEnd - src);
            for (int k = 0; k < kPointers3 && counter > k; ++k) {
                const std::size_t o = hashtable3[hash * kPointers3 + k];
                if (static_cast<std::uint8_t>(fetch) == src_p[o] &&
                    static_cast<std::uint8_t>(fetch >> 8) == src_p[o + 1] &&
                    static_cast<std::uint8_t>(fetch >> 16) == src_p[o + 2] &&
                    static_cast<std::ptrdiff_t>(o) <
                        static_cast<std::ptrdiff_t>(src) - static_cast<std::ptrdiff_t>(kMinOffset)) {
                    std::size_t m = 3;
                    while (src_p[o + m] == src_p[src + m] && m < remaining) ++m;
                    if (m > matchlen || (m == matchlen && o > offset2)) {
                        offset2 = o;
                        matchlen = m;
                    }
                }
            }
            hashtable3[hash * kPointers3 + (counter & (kPointers3 - 1))] =
                static_cast<std::uint32_t>(src);
            hashCounter[hash] = static_cast<std::uint8_t>(counter + 1);

            if (matchlen >= 3 && src - offset2 < 131071) {
                const std::size_t offset = src - offset2;
                for (std::size_t u = 1; u < matchlen; ++u) {
                    const std::uint32_t f = read3(src_p + src + u);
                    const std::uint32_t h = hash3(f);
                    const std::uint8_t c = hashCounter[h]++;
                    hashtable3[h * kPointers3 + (c & (kPointers3 - 1))] =
                        static_cast<std::uint32_t>(src + u);
                }
                src += matchlen;
                cwordVal = (cwordVal >> 1) | 0x80000000u;

                if (matchlen == 3 && offset <= 63) {
                    writeLE(dst_p + dst, static_cast<std::uint32_t>(offset << 2), 1);
                    dst += 1;
                } else if (matchlen == 3 && offset <= 16383) {
                    writeLE(dst_p + dst, static_cast<std::uint32_t>((offset << 2) | 1), 2);
                    dst += 2;
                } else if (matchlen <= 18 && offset <= 1023) {
                    writeLE(dst_p + dst,
                            static_cast<std::uint32_t>(((matchlen - 3) << 2) | (offset << 6) | 2),
                            2);
                    dst += 2;
                } else if (matchlen <= 33) {
                    writeLE(dst_p + dst,
                            static_cast<std::uint32_t>(((matchlen - 2) << 2) | (offset << 7) | 3),
                            3);
                    dst += 3;
                } else {
                    writeLE(dst_p + dst,
                            static_cast<std::uint32_t>(((matchlen - 3) << 7) | (offset << 15) | 3),
                            4);
                    dst += 4;
                }
            } else {
                dst_p[dst++] = src_p[src++];
                cwordVal >>= 1;
            }
        }
    }

    // trailing bytes are always literals
    while (src <= size - 1) {
        if ((cwordVal & 1) == 1) {
            writeLE(dst_p + cwordPtr, (cwordVal >> 1) | 0x80000000u, 4);
            cwordPtr = dst;
            dst += kCwordLen;
            cwordVal = 0x80000000u;
        }
        dst_p[dst++] = src_p[src++];
        cwordVal >>= 1;
    }
    while ((cwordVal & 1) != 1) cwordVal >>= 1;
    writeLE(dst_p + cwordPtr, (cwordVal >> 1) | 0x80000000u, 4);

    if (dst >= size + kHeaderLen) return storedStream(source, level);

    dst_p[0] = static_cast<std::uint8_t>(2 | 1 | (static_cast<int>(level) << 2) | 0x40);
    writeLE(dst_p + 1, static_cast<std::uint32_t>(dst), 4);
    writeLE(dst_p + 5, static_cast<std::uint32_t>(size), 4);
    destination.resize(dst);
    return destination;
}

namespace detail {

// Bounds-checked view of the compressed body.
struct Reader {
    const std::uint8_t* p;
    std::size_t len;

    std::uint8_t byteAt(std::size_t i) const {
        if (i >= len) throw MalformedStream("QuickLZ stream truncated");
        return p[i];
    }
    std::uint32_t leAt(std::size_t i, int n) const {
        if (i + n > len) throw MalformedStream("QuickLZ stream truncated");
        std::uint32_t v = 0;
        for (int k = 0; k < n; ++k) v |= static_cast<std::uint32_t>(p[i + k]) << (8 * k);
        return v;
    }
};

} // namespace detail

inline std::size_t declaredCompressedSize(ByteView stream) {
    using namespace detail;
    Reader r{stream.data(), stream.size()};
    const bool longForm = (r.byteAt(0) & 2) != 0;
    return longForm ? r.leAt(1, 4) : r.byteAt(1);
}

inline std::size_t declaredDecompressedSize(ByteView stream) {
    using namespace detail;
    Reader r{stream.data(), stream.size()};
    const bool longForm = (r.byteAt(0) & 2) != 0;
    return longForm ? r.leAt(5, 4) : r.byteAt(2);
}

inline Bytes decompress(ByteView stream) {
    using namespace detail;
    Reader in{stream.data(), stream.size()};

    const std::uint8_t flags = in.byteAt(0);
    const int level = (flags >> 2) & 3;
    if (level != 1 && level != 3)
        throw UnsupportedLevel("C# version only supports level 1 and 3");

    const std::size_t headerLen = (flags & 2) ? kHeaderLen : 3;
    const std::size_t sizeCompressed = declaredCompressedSize(stream);
    const std::size_t size = declaredDecompressedSize(stream);
    if (sizeCompressed != stream.size())
        throw MalformedStream("declared compressed size does not match stream length");

    if ((flags & 1) == 0) {
        if (headerLen + size != stream.size())
            throw MalformedStream("stored stream body does not match declared size");
        return Bytes(stream.begin() + headerLen, stream.end());
    }

    Bytes destination(size);
    std::uint8_t* dst_p = destination.data();
    std::size_t dst = 0;
    std::size_t src = headerLen;
    std::uint32_t cwordVal = 1;

    const std::ptrdiff_t lastMatchStart =
        static_cast<std::ptrdiff_t>(size) -
        static_cast<std::ptrdiff_t>(kUnconditionalMatchLen + kUncompressedEnd + 1);

    std::uint32_t hashtable[kHashValues] = {};
    std::ptrdiff_t lastHashed = -1;

    if (size == 0) throw MalformedStream("compressed stream declares empty output");

    for (;;) {
        if (cwordVal == 1) {
            cwordVal = in.leAt(src, 4);
            src += 4;
        }

        if ((cwordVal & 1) == 1) {
            cwordVal >>= 1;

            std::size_t matchlen;
            std::size_t offset2;
            if (level == 1) {
                const std::uint32_t fetch = in.leAt(src, 2);
                const std::uint32_t hash = (fetch >> 4) & 0xfff;
                offset2 = hashtable[hash];
                if ((fetch & 0xf) != 0) {
                    matchlen = (fetch & 0xf) + 2;
                    src += 2;
                } else {
                    matchlen = in.byteAt(src + 2);
                    src += 3;
                }
            } else {
                const std::uint32_t b0 = in.byteAt(src);
                std::size_t offset;
                if ((b0 & 3) == 0) {
                    offset = (b0 & 0xff) >> 2;
                    matchlen = 3;
                    src += 1;
                } else if ((b0 & 2) == 0) {
                    offset = (in.leAt(src, 2) & 0xffff) >> 2;
                    matchlen = 3;
                    src += 2;
                } else if ((b0 & 1) == 0) {
                    const std::uint32_t fetch = in.leAt(src, 2);
                    offset = (fetch & 0xffff) >> 6;
                    matchlen = ((fetch >> 2) & 15) + 3;
                    src += 2;
                } else if ((b0 & 127) != 3) {
                    const std::uint32_t fetch = in.leAt(src, 3);
                    offset = (fetch >> 7) & 0x1ffff;
                    matchlen = ((fetch >> 2) & 0x1f) + 2;
                    src += 3;
                } else {
                    const std::uint32_t fetch = in.leAt(src, 4);
                    offset = fetch >> 15;
                    matchlen = ((fetch >> 7) & 255) + 3;
                    src += 4;
                }
                if (offset == 0 || offset > dst)
                    throw MalformedStream("match offset outside decoded output");
                offset2 = dst - offset;
            }

            if (matchlen < 3 || dst + matchlen > size || offset2 >= dst)
                throw MalformedStream("match overruns decoded output");
            for (std::size_t i = 0; i < matchlen; ++i) dst_p[dst + i] = dst_p[offset2 + i];
            dst += matchlen;

            if (level == 1) {
                // mirror the compressor: hash every position up to and including the
                // match start, skip match interiors
                while (lastHashed < static_cast<std::ptrdiff_t>(dst - matchlen)) {
                    ++lastHashed;
                    const std::uint32_t f = read3(dst_p + lastHashed);
                    hashtable[hash3(f)] = static_cast<std::uint32_t>(lastHashed);
                }
                lastHashed = static_cast<std::ptrdiff_t>(dst) - 1;
            }
        } else {
            if (static_cast<std::ptrdiff_t>(dst) <= lastMatchStart) {
                dst_p[dst++] = in.byteAt(src);
                ++src;
                cwordVal >>= 1;
                if (level == 1) {
                    while (lastHashed < static_cast<std::ptrdiff_t>(dst) - 3) {
                        ++lastHashed;
                        const std::uint32_t f = read3(dst_p + lastHashed);
                        hashtable[hash3(f)] = static_cast<std::uint32_t>(lastHashed);
                    }
                }
            } else {
                while (dst <= size - 1) {
                    if (cwordVal == 1) {
                        src += kCwordLen;
                        cwordVal = 0x80000000u;
                    }
                    dst_p[dst++] = in.byteAt(src);
                    ++src;
                    cwordVal >>= 1;
                }
                return destination;
            }
        }
    }
}

} // namespace bqlab::quicklz
