#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string_view>

namespace neardup {

// Seedable 64-bit non-cryptographic hash (the XXH64 algorithm). This is the
// single hash primitive of the whole system: shingle fingerprints, the
// simulated minhash permutations and band compression all go through it,
// each keyed with a different seed.
namespace detail {

inline constexpr uint64_t kPrime1 = 0x9E3779B185EBCA87ULL;
inline constexpr uint64_t kPrime2 = 0xC2B2AE3D27D4EB4FULL;
inline constexpr uint64_t kPrime3 = 0x165667B19E3779F9ULL;
inline constexpr uint64_t kPrime4 = 0x85EBCA77C2B2AE63ULL;
inline constexpr uint64_t kPrime5 = 0x27D4EB2F165667C5ULL;

inline uint64_t read64(const unsigned char* p) {
    uint64_t v;
    std::memcpy(&v, p, 8);
    if constexpr (std::endian::native == std::endian::big) {
        v = std::byteswap(v);
    }
    return v;
}

inline uint64_t read32(const unsigned char* p) {
    uint32_t v;
    std::memcpy(&v, p, 4);
    if constexpr (std::endian::native == std::endian::big) {
        v = std::byteswap(v);
    }
    return v;
}

inline uint64_t round64(uint64_t acc, uint64_t input) {
    acc += input * kPrime2;
    acc = std::rotl(acc, 31);
    acc *= kPrime1;
    return acc;
}

inline uint64_t merge_round(uint64_t acc, uint64_t val) {
    acc ^= round64(0, val);
    return acc * kPrime1 + kPrime4;
}

} // namespace detail

/// XXH64 of an arbitrary byte range under the given seed.
inline uint64_t hash64(const void* data, std::size_t len, uint64_t seed) {
    using namespace detail;
    const auto* p = static_cast<const unsigned char*>(data);
    const unsigned char* const end = p + len;
    uint64_t h;

    if (len >= 32) {
        uint64_t v1 = seed + kPrime1 + kPrime2;
        uint64_t v2 = seed + kPrime2;
        uint64_t v3 = seed;
        uint64_t v4 = seed - kPrime1;
        const unsigned char* const limit = end - 32;
        do {
            v1 = round64(v1, read64(p));
            v2 = round64(v2, read64(p + 8));
            v3 = round64(v3, read64(p + 16));
            v4 = round64(v4, read64(p + 24));
            p += 32;
        } while (p <= limit);
        h = std::rotl(v1, 1) + std::rotl(v2, 7) + std::rotl(v3, 12) + std::rotl(v4, 18);
        h = merge_round(h, v1);
        h = merge_round(h, v2);
        h = merge_round(h, v3);
        h = merge_round(h, v4);
    } else {
        h = seed + kPrime5;
    }

    h += static_cast<uint64_t>(len);

    while (p + 8 <= end) {
        h ^= round64(0, read64(p));
        h = std::rotl(h, 27) * kPrime1 + kPrime4;
        p += 8;
    }
    if (p + 4 <= end) {
        h ^= read32(p) * kPrime1;
        h = std::rotl(h, 23) * kPrime2 + kPrime3;
        p += 4;
    }
    while (p < end) {
        h ^= static_cast<uint64_t>(*p) * kPrime5;
        h = std::rotl(h, 11) * kPrime1;
        ++p;
    }

    h ^= h >> 33;
    h *= kPrime2;
    h ^= h >> 29;
    h *= kPrime3;
    h ^= h >> 32;
    return h;
}

inline uint64_t hash64(std::string_view s, uint64_t seed) {
    return hash64(s.data(), s.size(), seed);
}

/// Hash of a single 64-bit value (its little-endian bytes) under a seed.
inline uint64_t hash64(uint64_t value, uint64_t seed) {
    unsigned char buf[8];
    if constexpr (std::endian::native == std::endian::big) {
        value = std::byteswap(value);
    }
    std::memcpy(buf, &value, 8);
    return hash64(buf, 8, seed);
}

/// Deterministic seed stream: the seed of hash-function `index` under one
/// corpus-wide master seed. Index 0 is reserved for shingle fingerprinting;
/// the minhash family uses indices 1..M.
inline uint64_t derive_seed(uint64_t master_seed, uint32_t index) {
    return hash64(static_cast<uint64_t>(index), master_seed);
}

} // namespace neardup
