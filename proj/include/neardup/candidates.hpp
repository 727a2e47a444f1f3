#pragma once

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "neardup/errors.hpp"
#include "neardup/extsort.hpp"
#include "neardup/minhash.hpp"
#include "neardup/text.hpp"

namespace neardup {

/// Canonically ordered document pair (lo < hi), optionally carrying the
/// exact Jaccard score once verified. Identity is the id pair alone.
struct CandidatePair {
    uint64_t lo = 0;
    uint64_t hi = 0;
    std::optional<double> score;

    friend bool operator<(const CandidatePair& a, const CandidatePair& b) {
        return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi;
    }
    friend bool operator==(const CandidatePair& a, const CandidatePair& b) {
        return a.lo == b.lo && a.hi == b.hi;
    }
};

/// Synchronized accumulator of canonical pairs. Inserts are idempotent and
/// self-pairs are dropped, so per-band workers can feed it concurrently.
class PairSet {
public:
    void insert(uint64_t a, uint64_t b) {
        if (a == b) return;
        if (a > b) std::swap(a, b);
        std::lock_guard<std::mutex> lock(mu_);
        pairs_.insert(CandidatePair{a, b, std::nullopt});
    }

    std::size_t size() const {
        std::lock_guard<std::mutex> lock(mu_);
        return pairs_.size();
    }

    /// All pairs in (lo, hi) order.
    std::vector<CandidatePair> sorted() const {
        std::lock_guard<std::mutex> lock(mu_);
        return {pairs_.begin(), pairs_.end()};
    }

private:
    mutable std::mutex mu_;
    std::set<CandidatePair> pairs_;
};

/// |A ∩ B| / |A ∪ B| over sorted shingle vectors. Two empty sets are
/// defined as identical (similarity 1).
inline double exact_jaccard(const ShingleSet& a, const ShingleSet& b) {
    if (a.shingles.empty() && b.shingles.empty()) return 1.0;
    std::size_t inter = 0;
    std::size_t i = 0, j = 0;
    while (i < a.shingles.size() && j < b.shingles.size()) {
        if (a.shingles[i] < b.shingles[j]) {
            ++i;
        } else if (a.shingles[i] > b.shingles[j]) {
            ++j;
        } else {
            ++inter;
            ++i;
            ++j;
        }
    }
    const std::size_t uni = a.shingles.size() + b.shingles.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Ground-truth oracle: score every pair of documents and keep those with
/// exact Jaccard strictly above t. Quadratic; use only at bench scale.
inline std::vector<CandidatePair> baseline_all_pairs(std::span<const ShingleSet> corpus,
                                                     double threshold) {
    std::vector<CandidatePair> out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (std::size_t j = i + 1; j < corpus.size(); ++j) {
            const double s = exact_jaccard(corpus[i], corpus[j]);
            if (s > threshold) {
                uint64_t lo = corpus[i].doc_id;
                uint64_t hi = corpus[j].doc_id;
                if (lo > hi) std::swap(lo, hi);
                out.push_back(CandidatePair{lo, hi, s});
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Candidate pairs via the value-map method: for every minhash value keep
/// the list of documents carrying it, then pair up each list. Keeps every
/// (value, document) association in memory.
inline std::vector<CandidatePair> candidates_valuemap(std::span<const Signature> signatures) {
    std::unordered_map<uint64_t, std::vector<uint64_t>> by_value;
    for (const Signature& sig : signatures) {
        for (uint64_t v : sig.values) {
            auto& list = by_value[v];
            if (list.empty() || list.back() != sig.doc_id) list.push_back(sig.doc_id);
        }
    }
    PairSet pairs;
    for (auto& [v, list] : by_value) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            for (std::size_t j = i + 1; j < list.size(); ++j) {
                pairs.insert(list[i], list[j]);
            }
        }
    }
    return pairs.sorted();
}

/// Candidate pairs via sorting (minhash value, document) records and pairing
/// equal-value runs. Set-equal to candidates_valuemap but needs no value map;
/// spills to disk when the record stream exceeds the memory budget.
inline std::vector<CandidatePair> candidates_sorted(
    std::span<const Signature> signatures,
    std::size_t memory_budget_bytes = std::size_t{256} << 20,
    const std::filesystem::path& spill_dir = std::filesystem::temp_directory_path()) {
    struct Record {
        uint64_t value;
        uint64_t doc;
    };
    struct Less {
        bool operator()(const Record& a, const Record& b) const {
            return a.value != b.value ? a.value < b.value : a.doc < b.doc;
        }
    };
    ExternalSorter<Record, Less> sorter(memory_budget_bytes, spill_dir);
    for (const Signature& sig : signatures) {
        for (uint64_t v : sig.values) sorter.push({v, sig.doc_id});
    }

    PairSet pairs;
    std::vector<uint64_t> run;
    uint64_t run_value = 0;
    auto flush_run = [&] {
        for (std::size_t i = 0; i < run.size(); ++i) {
            for (std::size_t j = i + 1; j < run.size(); ++j) {
                pairs.insert(run[i], run[j]);
            }
        }
        run.clear();
    };
    sorter.for_each_sorted([&](const Record& r) {
        if (!run.empty() && r.value != run_value) flush_run();
        run_value = r.value;
        // a document can carry the same value on several rows; count it once
        if (run.empty() || run.back() != r.doc) run.push_back(r.doc);
    });
    flush_run();
    return pairs.sorted();
}

/// One cell of a band row: a document and its compressed band value.
struct BandCell {
    uint64_t value = 0;
    uint64_t doc_id = 0;
};

/// Pair up all documents sharing a band value within one band row.
inline void collect_band_pairs(std::span<const BandCell> cells, PairSet& pairs) {
    std::vector<BandCell> sorted_cells(cells.begin(), cells.end());
    std::sort(sorted_cells.begin(), sorted_cells.end(), [](const BandCell& a, const BandCell& b) {
        return a.value != b.value ? a.value < b.value : a.doc_id < b.doc_id;
    });
    std::size_t i = 0;
    while (i < sorted_cells.size()) {
        std::size_t j = i + 1;
        while (j < sorted_cells.size() && sorted_cells[j].value == sorted_cells[i].value) ++j;
        for (std::size_t a = i; a < j; ++a) {
            for (std::size_t b = a + 1; b < j; ++b) {
                pairs.insert(sorted_cells[a].doc_id, sorted_cells[b].doc_id);
            }
        }
        i = j;
    }
}

/// Candidate pairs via banding: a pair qualifies iff its band values agree
/// in at least one band index.
inline std::vector<CandidatePair> candidates_banded(std::span<const BandVector> vectors,
                                                    const LshParams& params) {
    params.validate();
    PairSet pairs;
    std::vector<BandCell> cells(vectors.size());
    for (uint32_t band = 0; band < params.bands; ++band) {
        for (std::size_t d = 0; d < vectors.size(); ++d) {
            if (vectors[d].bands.size() != params.bands) {
                throw std::invalid_argument("band vector length does not match parameters");
            }
            cells[d] = BandCell{vectors[d].bands[band], vectors[d].doc_id};
        }
        collect_band_pairs(cells, pairs);
    }
    return pairs.sorted();
}

/// Shingle lookup by document id.
class ShingleIndex {
public:
    explicit ShingleIndex(std::span<const ShingleSet> corpus) {
        by_id_.reserve(corpus.size());
        for (const ShingleSet& s : corpus) by_id_.emplace(s.doc_id, &s);
    }

    const ShingleSet& at(uint64_t doc_id) const {
        auto it = by_id_.find(doc_id);
        if (it == by_id_.end()) {
            throw DataError("document id " + std::to_string(doc_id) + " not present in corpus");
        }
        return *it->second;
    }

private:
    std::unordered_map<uint64_t, const ShingleSet*> by_id_;
};

/// Score candidates with exact Jaccard and keep those strictly above t.
/// The survivors are exact by construction: no false positives remain.
inline std::vector<CandidatePair> verify_pairs(std::span<const CandidatePair> pairs,
                                               const ShingleIndex& corpus,
                                               double threshold) {
    std::vector<CandidatePair> out;
    for (const CandidatePair& p : pairs) {
        const double s = exact_jaccard(corpus.at(p.lo), corpus.at(p.hi));
        if (s > threshold) out.push_back(CandidatePair{p.lo, p.hi, s});
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace neardup
