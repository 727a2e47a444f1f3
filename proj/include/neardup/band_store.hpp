#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "neardup/candidates.hpp"
#include "neardup/errors.hpp"
#include "neardup/kvstore.hpp"
#include "neardup/minhash.hpp"

namespace neardup {

/// How the band matrix is held during candidate generation.
enum class StorageDesign : uint8_t {
    in_memory = 0, // whole band matrix in RAM, nothing persisted
    design1 = 1,   // one stored row per matrix cell: (band, column) -> value
    design2 = 2,   // one stored row per (band, column slice): value list
};

inline const char* storage_name(StorageDesign d) {
    switch (d) {
        case StorageDesign::in_memory: return "in_memory";
        case StorageDesign::design1:   return "design1";
        case StorageDesign::design2:   return "design2";
    }
    return "?";
}

inline StorageDesign parse_storage(const std::string& s) {
    if (s == "in_memory" || s == "memory") return StorageDesign::in_memory;
    if (s == "design1") return StorageDesign::design1;
    if (s == "design2") return StorageDesign::design2;
    throw ConfigError("unknown storage design '" + s + "' (use in_memory, design1 or design2)");
}

/// Everything a reader needs to interpret the matrix file: dimensions,
/// the LSH parameters the matrix was built with, and the mapping from
/// dense column index back to external document id (real corpora have
/// non-consecutive ids).
struct StoreMeta {
    StorageDesign design = StorageDesign::design1;
    uint64_t master_seed = 0;
    LshParams params;
    uint32_t num_docs = 0;  // N
    uint32_t parts = 1;     // p (effective part count)
    uint32_t part_size = 0; // d = ceil(N / requested parts)
    std::vector<uint64_t> doc_ids; // column index -> external id
};

struct StoreWriteStats {
    uint64_t rows = 0;          // logical row writes (N*b for Design 1, p*b for Design 2)
    uint64_t payload_bytes = 0; // key + value bytes as accounted by the backend
};

namespace store_detail {

inline constexpr char kMetaFile[] = "meta";
inline constexpr char kDataFile[] = "bands.kv";
inline constexpr uint8_t kFormatVersion = 1;

inline uint64_t make_key(uint32_t band_id, uint32_t second) {
    return (static_cast<uint64_t>(band_id) << 32) | second;
}

inline void write_meta(const std::filesystem::path& dir, const StoreMeta& meta) {
    nlohmann::json j;
    j["design"] = static_cast<int>(meta.design);
    j["master_seed"] = meta.master_seed;
    j["num_hashes"] = meta.params.num_hashes;
    j["bands"] = meta.params.bands;
    j["rows"] = meta.params.rows;
    j["ngram"] = meta.params.ngram;
    j["threshold"] = meta.params.threshold;
    j["num_docs"] = meta.num_docs;
    j["parts"] = meta.parts;
    j["part_size"] = meta.part_size;
    j["doc_ids"] = meta.doc_ids;
    const std::string body = j.dump();
    std::ofstream out(dir / kMetaFile, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write store meta in " + dir.string());
    const char version = static_cast<char>(kFormatVersion);
    out.write(&version, 1);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw StorageError("failed writing store meta in " + dir.string());
}

inline StoreMeta read_meta(const std::filesystem::path& dir) {
    std::ifstream in(dir / kMetaFile, std::ios::binary);
    if (!in) throw StorageError("no band store at " + dir.string() + " (missing meta)");
    char version = 0;
    in.read(&version, 1);
    if (!in || static_cast<uint8_t>(version) != kFormatVersion) {
        throw StorageError("unsupported store format version in " + dir.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw StorageError("corrupt store meta in " + dir.string() + ": " + e.what());
    }
    StoreMeta meta;
    const int design = j.at("design").get<int>();
    if (design != 1 && design != 2) {
        throw StorageError("store meta names an unknown design");
    }
    meta.design = static_cast<StorageDesign>(design);
    meta.master_seed = j.at("master_seed").get<uint64_t>();
    meta.params.num_hashes = j.at("num_hashes").get<uint32_t>();
    meta.params.bands = j.at("bands").get<uint32_t>();
    meta.params.rows = j.at("rows").get<uint32_t>();
    meta.params.ngram = j.at("ngram").get<uint32_t>();
    meta.params.threshold = j.at("threshold").get<double>();
    meta.num_docs = j.at("num_docs").get<uint32_t>();
    meta.parts = j.at("parts").get<uint32_t>();
    meta.part_size = j.at("part_size").get<uint32_t>();
    meta.doc_ids = j.at("doc_ids").get<std::vector<uint64_t>>();
    if (meta.doc_ids.size() != meta.num_docs) {
        throw StorageError("store meta document table is inconsistent");
    }
    return meta;
}

} // namespace store_detail

/// Streams band vectors into an on-disk band matrix. Columns are assigned
/// in arrival order. Design 1 stores one row per cell; Design 2 buffers d
/// consecutive columns (one part) and stores one value list per band.
class BandStoreWriter {
public:
    /// `expected_docs` is required for Design 2 to fix the part size
    /// d = ceil(N / parts) up front.
    BandStoreWriter(std::filesystem::path dir, StorageDesign design,
                    const LshParams& params, uint64_t master_seed,
                    uint32_t parts, uint32_t expected_docs,
                    std::size_t memory_budget_bytes = std::size_t{64} << 20)
        : dir_(std::move(dir)), design_(design) {
        params.validate();
        if (design_ == StorageDesign::in_memory) {
            throw ConfigError("in_memory strategy has no on-disk store to write");
        }
        if (parts == 0) throw ConfigError("part count must be at least 1");
        std::filesystem::create_directories(dir_);
        meta_.design = design_;
        meta_.master_seed = master_seed;
        meta_.params = params;
        if (design_ == StorageDesign::design2) {
            meta_.part_size = (expected_docs + parts - 1) / parts;
            if (meta_.part_size == 0) meta_.part_size = 1;
        }
        kv_ = std::make_unique<OrderedKvWriter>(dir_ / store_detail::kDataFile,
                                                memory_budget_bytes);
    }

    /// Append one document column. Vectors must arrive in corpus order.
    void add(const BandVector& vec) {
        if (vec.bands.size() != meta_.params.bands) {
            throw std::invalid_argument("band vector length does not match store parameters");
        }
        const uint32_t column = meta_.num_docs++;
        meta_.doc_ids.push_back(vec.doc_id);
        if (design_ == StorageDesign::design1) {
            for (uint32_t band = 0; band < meta_.params.bands; ++band) {
                kv_->put(store_detail::make_key(band, column), vec.bands[band]);
                ++rows_;
            }
        } else {
            part_buffer_.push_back(vec.bands);
            if (part_buffer_.size() == meta_.part_size) flush_part();
        }
    }

    /// Number of row writes committed so far (partial-write detection).
    uint64_t committed_rows() const { return rows_; }

    StoreWriteStats finalize() {
        if (design_ == StorageDesign::design2 && !part_buffer_.empty()) flush_part();
        if (design_ == StorageDesign::design2) {
            meta_.parts = next_part_;
            if (meta_.parts == 0) meta_.parts = 1;
        } else {
            meta_.parts = 1;
            meta_.part_size = meta_.num_docs;
        }
        const KvWriteStats kv_stats = kv_->finalize();
        store_detail::write_meta(dir_, meta_);
        return StoreWriteStats{rows_, kv_stats.payload_bytes};
    }

    const StoreMeta& meta() const { return meta_; }

private:
    void flush_part() {
        const uint32_t part = next_part_++;
        std::vector<unsigned char> value(part_buffer_.size() * 8);
        for (uint32_t band = 0; band < meta_.params.bands; ++band) {
            for (std::size_t i = 0; i < part_buffer_.size(); ++i) {
                uint64_t v = part_buffer_[i][band];
                if constexpr (std::endian::native == std::endian::big) {
                    v = std::byteswap(v);
                }
                std::memcpy(value.data() + i * 8, &v, 8);
            }
            kv_->put(store_detail::make_key(band, part), value);
            ++rows_;
        }
        part_buffer_.clear();
    }

    std::filesystem::path dir_;
    StorageDesign design_;
    StoreMeta meta_;
    std::unique_ptr<OrderedKvWriter> kv_;
    std::vector<std::vector<uint64_t>> part_buffer_;
    uint32_t next_part_ = 0;
    uint64_t rows_ = 0;
};

/// Read counters for the §-style accounting checks: every band fetch is one
/// logical read, and peak_row_bytes tracks the largest materialized band
/// row (the reader's working set is one band, never the matrix).
struct StoreReadStats {
    uint64_t band_reads = 0;
    uint64_t bytes_read = 0;
    uint64_t peak_row_bytes = 0;
};

class BandStoreReader {
public:
    explicit BandStoreReader(std::filesystem::path dir)
        : dir_(std::move(dir)),
          meta_(store_detail::read_meta(dir_)),
          kv_(dir_ / store_detail::kDataFile) {}

    const StoreMeta& meta() const { return meta_; }
    const StoreReadStats& stats() const { return stats_; }

    /// Fetch one full band row: (document id, band value) for all N columns,
    /// in column order. Works for both designs; Design 2 appends the part
    /// lists in part order.
    std::vector<BandCell> read_band(uint32_t band_id) {
        if (band_id >= meta_.params.bands) {
            throw StorageError("unknown band id " + std::to_string(band_id) +
                               " (store has " + std::to_string(meta_.params.bands) + " bands)");
        }
        std::vector<BandCell> cells;
        cells.reserve(meta_.num_docs);
        const uint64_t lo = store_detail::make_key(band_id, 0);
        const uint64_t hi = store_detail::make_key(band_id + 1, 0);
        uint64_t bytes = 0;

        if (meta_.design == StorageDesign::design1) {
            kv_.scan(lo, hi, [&](uint64_t key, std::string_view value) {
                const auto column = static_cast<uint32_t>(key & 0xFFFFFFFFu);
                if (value.size() != 8 || column != cells.size()) {
                    throw StorageError("band " + std::to_string(band_id) +
                                       " is corrupt near column " + std::to_string(column));
                }
                cells.push_back(BandCell{kv_detail::get_u64_le(value.data()),
                                         meta_.doc_ids[cells.size()]});
                bytes += 8 + value.size();
            });
        } else {
            uint32_t next_part = 0;
            kv_.scan(lo, hi, [&](uint64_t key, std::string_view value) {
                const auto part = static_cast<uint32_t>(key & 0xFFFFFFFFu);
                if (part != next_part) {
                    throw StorageError("band " + std::to_string(band_id) + " is missing part " +
                                       std::to_string(next_part));
                }
                if (value.size() % 8 != 0) {
                    throw StorageError("band " + std::to_string(band_id) + " part " +
                                       std::to_string(part) + " has a torn value list");
                }
                for (std::size_t i = 0; i < value.size(); i += 8) {
                    if (cells.size() >= meta_.num_docs) {
                        throw StorageError("band " + std::to_string(band_id) +
                                           " holds more columns than the store meta declares");
                    }
                    cells.push_back(BandCell{kv_detail::get_u64_le(value.data() + i),
                                             meta_.doc_ids[cells.size()]});
                }
                ++next_part;
                bytes += 8 + value.size();
            });
            if (next_part != meta_.parts && meta_.num_docs > 0) {
                throw StorageError("band " + std::to_string(band_id) + " is missing part " +
                                   std::to_string(next_part));
            }
        }

        if (cells.size() != meta_.num_docs) {
            throw StorageError("band " + std::to_string(band_id) + " returned " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(meta_.num_docs));
        }
        ++stats_.band_reads;
        stats_.bytes_read += bytes;
        stats_.peak_row_bytes = std::max<uint64_t>(stats_.peak_row_bytes,
                                                   cells.size() * sizeof(BandCell));
        return cells;
    }

private:
    std::filesystem::path dir_;
    StoreMeta meta_;
    OrderedKvReader kv_;
    StoreReadStats stats_;
};

} // namespace neardup
