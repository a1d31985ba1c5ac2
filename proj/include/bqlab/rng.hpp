// Deterministic random source (splitmix64). Scenario runs seed one of these so
// IVs and fallback-domain picks replay identically across platforms.

#pragma once

#include <array>

#include "bqlab/bytes.hpp"

namespace bqlab {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform draw in [0, bound). bound must be nonzero.
    std::uint64_t below(std::uint64_t bound) {
        // rejection sampling keeps the draw unbiased
        const std::uint64_t limit = bound * (~0ull / bound);
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % bound;
    }

    std::array<std::uint8_t, 16> iv() {
        std::array<std::uint8_t, 16> out;
        for (int w = 0; w < 2; ++w) {
            std::uint64_t v = next();
            for (int i = 0; i < 8; ++i) out[8 * w + i] = static_cast<std::uint8_t>(v >> (8 * i));
        }
        return out;
    }

    Bytes bytes(std::size_t n) {
        Bytes out(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (i % 8 == 0) cached_ = next();
            out[i] = static_cast<std::uint8_t>(cached_ >> (8 * (i % 8)));
        }
        return out;
    }

private:
    std::uint64_t state_;
    std::uint64_t cached_ = 0;
};

} // namespace bqlab
