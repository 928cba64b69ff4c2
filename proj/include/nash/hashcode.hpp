#pragma once

// Fixed-length binary codes packed for fast Hamming distance. Bit i of the
// code sits at the most-significant end of word i/64, so the printed string
// (bit 0 first) is the most-significant-bit-first reading of the packed
// integer.

#include <array>
#include <bit>
#include <cstdint>
#include <string>

#include "nash/common.hpp"

namespace nash {

struct HashCode {
    std::uint32_t length = 0;  // l, at most 128
    std::array<std::uint64_t, 2> words{0, 0};

    static constexpr std::uint32_t max_bits = 128;

    explicit HashCode(std::uint32_t l = 0) : length(l) {
        NASH_REQUIRE(l <= max_bits, "HashCode: length exceeds 128 bits");
    }

    bool bit(std::uint32_t i) const {
        return (words[i >> 6] >> (63 - (i & 63))) & 1ULL;
    }

    void set_bit(std::uint32_t i, bool v) {
        std::uint64_t mask = 1ULL << (63 - (i & 63));
        if (v) words[i >> 6] |= mask;
        else words[i >> 6] &= ~mask;
    }

    std::uint32_t popcount() const {
        return static_cast<std::uint32_t>(std::popcount(words[0]) + std::popcount(words[1]));
    }

    std::string to_string() const {
        std::string s(length, '0');
        for (std::uint32_t i = 0; i < length; ++i)
            if (bit(i)) s[i] = '1';
        return s;
    }

    bool operator==(const HashCode& o) const {
        return length == o.length && words == o.words;
    }
};

inline std::uint32_t hamming_distance(const HashCode& a, const HashCode& b) {
    NASH_REQUIRE(a.length == b.length, "hamming_distance: code length mismatch");
    return static_cast<std::uint32_t>(std::popcount(a.words[0] ^ b.words[0]) +
                                      std::popcount(a.words[1] ^ b.words[1]));
}

// Packs a 0/1 (or probability-thresholded) vector; values > 0.5 become 1.
inline HashCode pack_bits(const Vec& bits) {
    NASH_REQUIRE(bits.size() <= HashCode::max_bits, "pack_bits: too many bits");
    HashCode code(static_cast<std::uint32_t>(bits.size()));
    for (std::uint32_t i = 0; i < code.length; ++i)
        if (bits[i] > 0.5) code.set_bit(i, true);
    return code;
}

inline Vec unpack_bits(const HashCode& code) {
    Vec bits(code.length, 0.0);
    for (std::uint32_t i = 0; i < code.length; ++i)
        if (code.bit(i)) bits[i] = 1.0;
    return bits;
}

inline HashCode parse_bitstring(const std::string& s) {
    HashCode code(static_cast<std::uint32_t>(s.size()));
    for (std::uint32_t i = 0; i < code.length; ++i) {
        if (s[i] == '1') code.set_bit(i, true);
        else NASH_REQUIRE(s[i] == '0', "parse_bitstring: invalid character");
    }
    return code;
}

}  // namespace nash
