#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neardup/hash.hpp"
#include "neardup/porter.hpp"

namespace neardup {

/// One input document: stable integer id plus raw UTF-8 text.
struct Document {
    uint64_t id = 0;
    std::string text;
};

/// The set of 64-bit word-n-gram fingerprints of one document.
/// `shingles` is sorted and duplicate-free.
struct ShingleSet {
    uint64_t doc_id = 0;
    std::vector<uint64_t> shingles;
};

inline bool is_token_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

inline char to_lower_ascii(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

/// Split text into lowercase tokens. Tokens are maximal runs of ASCII
/// alphanumeric characters; every other byte is a separator and dropped.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (is_token_char(c)) {
            current.push_back(to_lower_ascii(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

/// Stem one lowercase token. Purely numeric tokens pass through unchanged;
/// everything else gets the Porter treatment.
inline std::string stem(std::string token) {
    const bool numeric = !token.empty() &&
        std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (numeric) return token;
    return porter_stem(std::move(token));
}

/// Fingerprint of one n-gram window: the tokens joined by single spaces,
/// hashed under the corpus-wide shingle seed (seed index 0 of the family).
inline uint64_t hash_shingle(std::span<const std::string> window, uint64_t shingle_seed) {
    std::string joined;
    std::size_t len = window.size() - 1;
    for (const auto& t : window) len += t.size();
    joined.reserve(len);
    for (std::size_t i = 0; i < window.size(); ++i) {
        if (i > 0) joined.push_back(' ');
        joined += window[i];
    }
    return hash64(joined, shingle_seed);
}

/// Build the shingle set of a token sequence: every contiguous window of n
/// tokens, hashed. A document with fewer than n tokens (but at least one)
/// collapses to the single hash of its full token sequence, so tiny notes
/// remain comparable; an empty sequence yields the empty set.
inline ShingleSet shingle(uint64_t doc_id, std::span<const std::string> tokens,
                          uint32_t n, uint64_t shingle_seed) {
    ShingleSet out;
    out.doc_id = doc_id;
    if (tokens.empty()) return out;
    if (tokens.size() < n) {
        out.shingles.push_back(hash_shingle(tokens, shingle_seed));
        return out;
    }
    out.shingles.reserve(tokens.size() - n + 1);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        out.shingles.push_back(hash_shingle(tokens.subspan(i, n), shingle_seed));
    }
    std::sort(out.shingles.begin(), out.shingles.end());
    out.shingles.erase(std::unique(out.shingles.begin(), out.shingles.end()),
                       out.shingles.end());
    return out;
}

/// Full preprocessing pipeline: tokenize, stem, shingle.
inline ShingleSet prepare_document(const Document& doc, uint32_t n, uint64_t shingle_seed) {
    std::vector<std::string> tokens = tokenize(doc.text);
    for (auto& t : tokens) t = stem(std::move(t));
    return shingle(doc.id, tokens, n, shingle_seed);
}

} // namespace neardup
