#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <queue>
#include <string>
#include <type_traits>
#include <vector>

#include "neardup/errors.hpp"

namespace neardup {

// External merge sort for trivially copyable records. Records are buffered
// in memory up to the budget; overflow spills sorted runs to temporary files
// which are k-way merged on iteration. With everything under budget this is
// just std::sort.
template <typename Record, typename Less = std::less<Record>>
class ExternalSorter {
    static_assert(std::is_trivially_copyable_v<Record>);

public:
    explicit ExternalSorter(std::size_t memory_budget_bytes,
                            std::filesystem::path spill_dir = std::filesystem::temp_directory_path(),
                            Less less = Less())
        : budget_records_(std::max<std::size_t>(1, memory_budget_bytes / sizeof(Record))),
          spill_dir_(std::move(spill_dir)),
          less_(less) {}

    ~ExternalSorter() { remove_runs(); }

    ExternalSorter(const ExternalSorter&) = delete;
    ExternalSorter& operator=(const ExternalSorter&) = delete;

    void push(const Record& r) {
        buffer_.push_back(r);
        ++total_;
        if (buffer_.size() >= budget_records_) spill();
    }

    std::size_t size() const { return total_; }
    std::size_t run_count() const { return runs_.size(); }

    /// Visit every record in sorted order. May be called once.
    template <typename Fn>
    void for_each_sorted(Fn&& fn) {
        std::sort(buffer_.begin(), buffer_.end(), less_);
        if (runs_.empty()) {
            for (const Record& r : buffer_) fn(r);
            return;
        }
        merge_runs(std::forward<Fn>(fn));
    }

private:
    struct RunReader {
        std::ifstream in;
        Record head;
        bool valid = false;

        explicit RunReader(const std::filesystem::path& p) : in(p, std::ios::binary) {
            advance();
        }
        void advance() {
            valid = static_cast<bool>(in.read(reinterpret_cast<char*>(&head), sizeof(Record)));
        }
    };

    void spill() {
        std::sort(buffer_.begin(), buffer_.end(), less_);
        std::filesystem::path p = spill_dir_ /
            ("ndsort." + std::to_string(reinterpret_cast<std::uintptr_t>(this)) +
             "." + std::to_string(runs_.size()) + ".run");
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw StorageError("cannot create spill file " + p.string());
        out.write(reinterpret_cast<const char*>(buffer_.data()),
                  static_cast<std::streamsize>(buffer_.size() * sizeof(Record)));
        if (!out) throw StorageError("failed writing spill file " + p.string());
        runs_.push_back(std::move(p));
        buffer_.clear();
    }

    template <typename Fn>
    void merge_runs(Fn&& fn) {
        std::vector<RunReader> readers;
        readers.reserve(runs_.size());
        for (const auto& p : runs_) readers.emplace_back(p);

        // Heap over (record, reader index); the index breaks ties so the
        // merge order is fully deterministic.
        auto greater = [this](const std::pair<Record, std::size_t>& a,
                              const std::pair<Record, std::size_t>& b) {
            if (less_(a.first, b.first)) return false;
            if (less_(b.first, a.first)) return true;
            return a.second > b.second;
        };
        std::priority_queue<std::pair<Record, std::size_t>,
                            std::vector<std::pair<Record, std::size_t>>,
                            decltype(greater)> heap(greater);
        std::size_t buf_pos = 0;
        const std::size_t kBufferIdx = readers.size();
        for (std::size_t i = 0; i < readers.size(); ++i) {
            if (readers[i].valid) heap.push({readers[i].head, i});
        }
        if (buf_pos < buffer_.size()) heap.push({buffer_[buf_pos], kBufferIdx});

        while (!heap.empty()) {
            auto [rec, idx] = heap.top();
            heap.pop();
            fn(static_cast<const Record&>(rec));
            if (idx == kBufferIdx) {
                if (++buf_pos < buffer_.size()) heap.push({buffer_[buf_pos], kBufferIdx});
            } else {
                readers[idx].advance();
                if (readers[idx].valid) heap.push({readers[idx].head, idx});
            }
        }
        remove_runs();
    }

    void remove_runs() {
        for (const auto& p : runs_) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
        runs_.clear();
    }

    std::vector<Record> buffer_;
    std::size_t budget_records_;
    std::size_t total_ = 0;
    std::filesystem::path spill_dir_;
    std::vector<std::filesystem::path> runs_;
    Less less_;
};

} // namespace neardup
