#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "neardup/hash.hpp"
#include "neardup/text.hpp"

namespace neardup {

/// Signature rows of a document with no shingles at all. Sentinel
/// signatures compare equal only to each other, so empty documents end up
/// as exact duplicates of one another and of nothing else.
inline constexpr uint64_t kEmptyDocSentinel = std::numeric_limits<uint64_t>::max();

/// M seeded hash functions simulating M random permutations of the shingle
/// space. Seeds are derived deterministically from one master seed; seed
/// index 0 is reserved for shingle fingerprinting and band compression.
class HashFamily {
public:
    HashFamily(uint32_t count, uint64_t master_seed)
        : master_seed_(master_seed) {
        if (count == 0) throw std::invalid_argument("hash family needs at least one function");
        seeds_.reserve(count);
        for (uint32_t k = 0; k < count; ++k) {
            seeds_.push_back(derive_seed(master_seed, k + 1));
        }
        std::unordered_set<uint64_t> distinct(seeds_.begin(), seeds_.end());
        distinct.insert(shingle_seed());
        if (distinct.size() != seeds_.size() + 1) {
            throw std::invalid_argument("derived hash seeds collide; change the master seed");
        }
    }

    uint32_t size() const { return static_cast<uint32_t>(seeds_.size()); }
    uint64_t master_seed() const { return master_seed_; }

    /// h_k(value): the k-th simulated permutation, k in [0, M).
    uint64_t apply(uint32_t k, uint64_t value) const {
        return hash64(value, seeds_[k]);
    }

    uint64_t shingle_seed() const { return shingle_seed_of(master_seed_); }
    uint64_t band_seed() const { return band_seed_of(master_seed_); }

    static uint64_t shingle_seed_of(uint64_t master_seed) {
        return derive_seed(master_seed, 0);
    }

    /// Band compression reuses seed index 0 under a fixed domain tag so band
    /// values and shingle fingerprints never share a hash domain.
    static uint64_t band_seed_of(uint64_t master_seed) {
        return shingle_seed_of(master_seed) ^ 0xB0BAB4BDD00D5EEDULL;
    }

private:
    uint64_t master_seed_;
    std::vector<uint64_t> seeds_;
};

/// M minhash values of one document.
struct Signature {
    uint64_t doc_id = 0;
    std::vector<uint64_t> values;
};

/// b compressed band values of one document (its column in the band matrix).
struct BandVector {
    uint64_t doc_id = 0;
    std::vector<uint64_t> bands;
};

/// The shared LSH parameter block: M hash functions split into b bands of
/// r rows, shingle width n, and the similarity threshold t.
struct LshParams {
    uint32_t num_hashes = 100;
    uint32_t bands = 50;
    uint32_t rows = 2;
    uint32_t ngram = 8;
    double threshold = 0.4;

    void validate() const {
        if (num_hashes == 0 || bands == 0 || rows == 0 || ngram == 0) {
            throw std::invalid_argument("LSH counts must all be at least 1");
        }
        if (num_hashes != bands * rows) {
            throw std::invalid_argument("hash count must equal bands * rows exactly");
        }
        if (!(threshold >= 0.0 && threshold <= 1.0)) {
            throw std::invalid_argument("threshold must lie in [0, 1]");
        }
    }
};

/// Minhash signature: values[k] = min over shingles of h_k(shingle).
/// An empty shingle set yields the all-sentinel signature.
inline Signature make_signature(const ShingleSet& set, const HashFamily& family) {
    Signature sig;
    sig.doc_id = set.doc_id;
    sig.values.assign(family.size(), kEmptyDocSentinel);
    for (uint64_t s : set.shingles) {
        for (uint32_t k = 0; k < family.size(); ++k) {
            const uint64_t h = family.apply(k, s);
            if (h < sig.values[k]) sig.values[k] = h;
        }
    }
    return sig;
}

/// Fraction of signature rows on which the two documents agree; estimates
/// their Jaccard similarity.
inline double estimate_similarity(const Signature& a, const Signature& b) {
    if (a.values.size() != b.values.size()) {
        throw std::invalid_argument("signatures built with different hash counts");
    }
    if (a.values.empty()) return 1.0;
    std::size_t matches = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (a.values[i] == b.values[i]) ++matches;
    }
    return static_cast<double>(matches) / static_cast<double>(a.values.size());
}

/// Compress a signature into its band vector: band j is the 64-bit hash of
/// the little-endian bytes of signature rows [j*r, (j+1)*r).
inline BandVector make_band_vector(const Signature& sig, const LshParams& params,
                                   uint64_t band_seed) {
    params.validate();
    if (sig.values.size() != params.num_hashes) {
        throw std::invalid_argument("signature length does not match LSH parameters");
    }
    BandVector out;
    out.doc_id = sig.doc_id;
    out.bands.reserve(params.bands);
    std::vector<unsigned char> buf(static_cast<std::size_t>(params.rows) * 8);
    for (uint32_t j = 0; j < params.bands; ++j) {
        for (uint32_t i = 0; i < params.rows; ++i) {
            uint64_t v = sig.values[static_cast<std::size_t>(j) * params.rows + i];
            if constexpr (std::endian::native == std::endian::big) {
                v = std::byteswap(v);
            }
            std::memcpy(buf.data() + static_cast<std::size_t>(i) * 8, &v, 8);
        }
        out.bands.push_back(hash64(buf.data(), buf.size(), band_seed));
    }
    return out;
}

/// Probability that a pair of Jaccard similarity s agrees in all rows of at
/// least one band: 1 - (1 - s^r)^b.
inline double candidate_probability(double s, uint32_t b, uint32_t r) {
    return 1.0 - std::pow(1.0 - std::pow(s, static_cast<double>(r)),
                          static_cast<double>(b));
}

} // namespace neardup
