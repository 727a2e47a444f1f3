#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "neardup/errors.hpp"

namespace neardup {

// Embedded write-once ordered key-value file. Keys are 64-bit integers
// stored big-endian so byte order equals numeric order; values are opaque
// byte strings. The writer accepts records in any order, spilling sorted
// runs to disk when over its memory budget, and merges them into a single
// sorted data file on finalize. Readers range-scan through a sparse block
// index. The file bytes are a pure function of the record set, which keeps
// rebuilt stores bit-identical.
//
// Layout:  header magic (8) | records | index | footer (40)
//   record: key u64 BE, value length u32 LE, value bytes
//   index:  one (key u64 BE, file offset u64 LE) entry per block
//   footer: index offset u64 LE, index entries u64 LE, record count u64 LE,
//           payload bytes u64 LE, tail magic (8)
namespace kv_detail {

inline constexpr char kHeadMagic[8] = {'N', 'D', 'K', 'V', '0', '0', '0', '1'};
inline constexpr char kTailMagic[8] = {'N', 'D', 'K', 'V', 'F', 'T', 'R', '1'};
inline constexpr std::size_t kIndexEvery = 1024; // records per index block

inline void put_u64_be(std::string& out, uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) v = std::byteswap(v);
    out.append(reinterpret_cast<const char*>(&v), 8);
}

inline void put_u64_le(std::string& out, uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) v = std::byteswap(v);
    out.append(reinterpret_cast<const char*>(&v), 8);
}

inline void put_u32_le(std::string& out, uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) v = std::byteswap(v);
    out.append(reinterpret_cast<const char*>(&v), 4);
}

inline uint64_t get_u64_be(const char* p) {
    uint64_t v;
    std::memcpy(&v, p, 8);
    if constexpr (std::endian::native == std::endian::little) v = std::byteswap(v);
    return v;
}

inline uint64_t get_u64_le(const char* p) {
    uint64_t v;
    std::memcpy(&v, p, 8);
    if constexpr (std::endian::native == std::endian::big) v = std::byteswap(v);
    return v;
}

inline uint32_t get_u32_le(const char* p) {
    uint32_t v;
    std::memcpy(&v, p, 4);
    if constexpr (std::endian::native == std::endian::big) v = std::byteswap(v);
    return v;
}

} // namespace kv_detail

struct KvWriteStats {
    uint64_t records = 0;
    uint64_t payload_bytes = 0; // keys + values, excluding framing
};

class OrderedKvWriter {
public:
    explicit OrderedKvWriter(std::filesystem::path file,
                             std::size_t memory_budget_bytes = std::size_t{64} << 20)
        : file_(std::move(file)), budget_(std::max<std::size_t>(memory_budget_bytes, 1 << 16)) {}

    ~OrderedKvWriter() { remove_runs(); }

    OrderedKvWriter(const OrderedKvWriter&) = delete;
    OrderedKvWriter& operator=(const OrderedKvWriter&) = delete;

    void put(uint64_t key, std::span<const unsigned char> value) {
        buffer_.emplace_back(key, std::string(reinterpret_cast<const char*>(value.data()),
                                              value.size()));
        buffered_bytes_ += 8 + value.size() + 32;
        ++committed_;
        if (buffered_bytes_ >= budget_) spill();
    }

    void put(uint64_t key, uint64_t value_u64_le) {
        unsigned char buf[8];
        if constexpr (std::endian::native == std::endian::big) {
            value_u64_le = std::byteswap(value_u64_le);
        }
        std::memcpy(buf, &value_u64_le, 8);
        put(key, std::span<const unsigned char>(buf, 8));
    }

    /// Records accepted so far; lets callers detect how far a write got if
    /// finalize never ran.
    uint64_t committed() const { return committed_; }

    /// Merge all runs plus the tail buffer into the final sorted file.
    /// Duplicate keys violate the primary-key contract and are rejected.
    KvWriteStats finalize() {
        std::sort(buffer_.begin(), buffer_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::ofstream out(file_, std::ios::binary | std::ios::trunc);
        if (!out) throw StorageError("cannot create store file " + file_.string());
        out.write(kv_detail::kHeadMagic, 8);

        std::string index;
        uint64_t offset = 8;
        uint64_t count = 0;
        uint64_t payload = 0;
        bool have_prev = false;
        uint64_t prev_key = 0;

        auto emit = [&](uint64_t key, const std::string& value) {
            if (have_prev && key == prev_key) {
                throw StorageError("duplicate store key " + std::to_string(key));
            }
            have_prev = true;
            prev_key = key;
            if (count % kv_detail::kIndexEvery == 0) {
                kv_detail::put_u64_be(index, key);
                kv_detail::put_u64_le(index, offset);
            }
            std::string rec;
            rec.reserve(12 + value.size());
            kv_detail::put_u64_be(rec, key);
            kv_detail::put_u32_le(rec, static_cast<uint32_t>(value.size()));
            rec += value;
            out.write(rec.data(), static_cast<std::streamsize>(rec.size()));
            offset += rec.size();
            payload += 8 + value.size();
            ++count;
        };

        if (runs_.empty()) {
            for (const auto& [k, v] : buffer_) emit(k, v);
        } else {
            merge_into(emit);
        }

        out.write(index.data(), static_cast<std::streamsize>(index.size()));
        std::string footer;
        kv_detail::put_u64_le(footer, offset);
        kv_detail::put_u64_le(footer, index.size() / 16);
        kv_detail::put_u64_le(footer, count);
        kv_detail::put_u64_le(footer, payload);
        footer.append(kv_detail::kTailMagic, 8);
        out.write(footer.data(), static_cast<std::streamsize>(footer.size()));
        out.flush();
        if (!out) throw StorageError("failed writing store file " + file_.string());
        buffer_.clear();
        remove_runs();
        return KvWriteStats{count, payload};
    }

private:
    void spill() {
        std::sort(buffer_.begin(), buffer_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::filesystem::path p = file_;
        p += ".run" + std::to_string(runs_.size());
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw StorageError("cannot create spill file " + p.string());
        std::string rec;
        for (const auto& [k, v] : buffer_) {
            rec.clear();
            kv_detail::put_u64_be(rec, k);
            kv_detail::put_u32_le(rec, static_cast<uint32_t>(v.size()));
            rec += v;
            out.write(rec.data(), static_cast<std::streamsize>(rec.size()));
        }
        if (!out) throw StorageError("failed writing spill file " + p.string());
        runs_.push_back(std::move(p));
        buffer_.clear();
        buffered_bytes_ = 0;
    }

    struct RunReader {
        std::ifstream in;
        uint64_t key = 0;
        std::string value;
        bool valid = false;

        explicit RunReader(const std::filesystem::path& p) : in(p, std::ios::binary) {
            advance();
        }
        void advance() {
            char hdr[12];
            if (!in.read(hdr, 12)) {
                valid = false;
                return;
            }
            key = kv_detail::get_u64_be(hdr);
            const uint32_t len = kv_detail::get_u32_le(hdr + 8);
            value.resize(len);
            valid = static_cast<bool>(in.read(value.data(), len));
        }
    };

    template <typename Emit>
    void merge_into(Emit&& emit) {
        std::vector<RunReader> readers;
        readers.reserve(runs_.size());
        for (const auto& p : runs_) readers.emplace_back(p);
        const std::size_t kBufferIdx = readers.size();
        std::size_t buf_pos = 0;

        using Head = std::pair<uint64_t, std::size_t>;
        auto greater = [](const Head& a, const Head& b) { return a > b; };
        std::priority_queue<Head, std::vector<Head>, decltype(greater)> heap(greater);
        for (std::size_t i = 0; i < readers.size(); ++i) {
            if (readers[i].valid) heap.push({readers[i].key, i});
        }
        if (buf_pos < buffer_.size()) heap.push({buffer_[buf_pos].first, kBufferIdx});

        while (!heap.empty()) {
            auto [key, idx] = heap.top();
            heap.pop();
            if (idx == kBufferIdx) {
                emit(key, buffer_[buf_pos].second);
                if (++buf_pos < buffer_.size()) heap.push({buffer_[buf_pos].first, kBufferIdx});
            } else {
                emit(key, readers[idx].value);
                readers[idx].advance();
                if (readers[idx].valid) heap.push({readers[idx].key, idx});
            }
        }
    }

    void remove_runs() {
        for (const auto& p : runs_) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
        runs_.clear();
    }

    std::filesystem::path file_;
    std::size_t budget_;
    std::vector<std::pair<uint64_t, std::string>> buffer_;
    std::size_t buffered_bytes_ = 0;
    uint64_t committed_ = 0;
    std::vector<std::filesystem::path> runs_;
};

class OrderedKvReader {
public:
    explicit OrderedKvReader(std::filesystem::path file) : file_(std::move(file)) {
        std::ifstream in(file_, std::ios::binary);
        if (!in) throw StorageError("cannot open store file " + file_.string());
        in.seekg(0, std::ios::end);
        const auto file_size = static_cast<uint64_t>(in.tellg());
        if (file_size < 48) throw StorageError("store file truncated: " + file_.string());

        char head[8];
        in.seekg(0);
        in.read(head, 8);
        if (!in || std::memcmp(head, kv_detail::kHeadMagic, 8) != 0) {
            throw StorageError("not a band store file: " + file_.string());
        }

        char footer[40];
        in.seekg(static_cast<std::streamoff>(file_size - 40));
        in.read(footer, 40);
        if (!in || std::memcmp(footer + 32, kv_detail::kTailMagic, 8) != 0) {
            throw StorageError("store file missing footer (incomplete write): " + file_.string());
        }
        index_offset_ = kv_detail::get_u64_le(footer);
        const uint64_t index_entries = kv_detail::get_u64_le(footer + 8);
        record_count_ = kv_detail::get_u64_le(footer + 16);
        payload_bytes_ = kv_detail::get_u64_le(footer + 24);
        if (index_offset_ + index_entries * 16 + 40 != file_size) {
            throw StorageError("store file index corrupt: " + file_.string());
        }

        index_.reserve(index_entries);
        in.seekg(static_cast<std::streamoff>(index_offset_));
        std::vector<char> raw(index_entries * 16);
        in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
        if (!in) throw StorageError("store file index unreadable: " + file_.string());
        for (uint64_t i = 0; i < index_entries; ++i) {
            index_.push_back({kv_detail::get_u64_be(raw.data() + i * 16),
                              kv_detail::get_u64_le(raw.data() + i * 16 + 8)});
        }
    }

    uint64_t record_count() const { return record_count_; }
    uint64_t payload_bytes() const { return payload_bytes_; }

    /// Visit records with lo <= key < hi in key order. fn(key, value bytes).
    /// Returns the number of records visited. Each scan opens its own file
    /// handle, so concurrent readers need no coordination.
    template <typename Fn>
    uint64_t scan(uint64_t lo, uint64_t hi, Fn&& fn) const {
        if (index_.empty() || lo >= hi) return 0;

        // greatest indexed block whose first key is <= lo
        auto it = std::upper_bound(index_.begin(), index_.end(), lo,
                                   [](uint64_t v, const auto& e) { return v < e.first; });
        uint64_t offset = it == index_.begin() ? index_.front().second : std::prev(it)->second;

        std::ifstream in(file_, std::ios::binary);
        if (!in) throw StorageError("cannot open store file " + file_.string());
        in.seekg(static_cast<std::streamoff>(offset));

        uint64_t visited = 0;
        std::string value;
        while (static_cast<uint64_t>(in.tellg()) < index_offset_) {
            char hdr[12];
            if (!in.read(hdr, 12)) break;
            const uint64_t key = kv_detail::get_u64_be(hdr);
            const uint32_t len = kv_detail::get_u32_le(hdr + 8);
            if (key >= hi) break;
            if (key < lo) {
                in.seekg(len, std::ios::cur);
                continue;
            }
            value.resize(len);
            if (!in.read(value.data(), len)) {
                throw StorageError("store record truncated in " + file_.string());
            }
            fn(key, std::string_view(value));
            ++visited;
        }
        return visited;
    }

private:
    std::filesystem::path file_;
    uint64_t index_offset_ = 0;
    uint64_t record_count_ = 0;
    uint64_t payload_bytes_ = 0;
    std::vector<std::pair<uint64_t, uint64_t>> index_;
};

} // namespace neardup
