// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lanebft/state.hpp>

#include <filesystem>

namespace lanebft {

enum class WalRecordKind : uint8_t {
    kUpdate = 0,
    kHeightMarker = 1,
};

/// One write-ahead-log record. Framing on the wire:
///   len(4 BE) | body | crc32(body)(4 BE)
/// body: seq(8 BE) | height(8 BE) | kind(1) | for updates:
///   key_len(2 BE) | key | old_flag(1) [old(32)] | new_flag(1) [new(32)]
/// old_value is carried so commitment updates can be audited from the log.
struct WalRecord {
    uint64_t seq = 0;
    uint64_t height = 0;
    WalRecordKind kind = WalRecordKind::kUpdate;
    Location key;
    std::optional<Bytes32> old_value;
    std::optional<Bytes32> new_value;

    bool operator==(const WalRecord&) const = default;
};

Bytes encode_wal_record(const WalRecord& record);

/// A complete record with a bad checksum is corruption (hard error); an
/// incomplete frame at the end of the log is a torn tail from a crash and
/// scanning stops cleanly before it.
class WalCorruptionError : public std::runtime_error {
public:
    WalCorruptionError(std::string msg, size_t offset)
        : std::runtime_error(std::move(msg)), offset_(offset) {}
    size_t offset() const { return offset_; }

private:
    size_t offset_;
};

struct WalScan {
    std::vector<WalRecord> records;
    bool torn_tail = false;
    size_t torn_offset = 0;  // start of the torn frame, if any
};

WalScan scan_wal(ByteView log);

/// Where WAL bytes go. Appends are buffered; only flush() makes them
/// durable, mirroring asynchronous disk writes. durable_bytes() is what a
/// crash would leave behind.
class WalSink {
public:
    virtual ~WalSink() = default;
    virtual void append(ByteView data) = 0;
    virtual void flush() = 0;
    virtual Bytes durable_bytes() const = 0;
};

class MemoryWalSink : public WalSink {
public:
    void append(ByteView data) override { pending_.insert(pending_.end(), data.begin(), data.end()); }
    void flush() override {
        durable_.insert(durable_.end(), pending_.begin(), pending_.end());
        pending_.clear();
    }
    Bytes durable_bytes() const override { return durable_; }
    Bytes all_bytes() const;

private:
    Bytes durable_;
    Bytes pending_;
};

class FileWalSink : public WalSink {
public:
    explicit FileWalSink(std::filesystem::path path);
    void append(ByteView data) override;
    void flush() override;
    Bytes durable_bytes() const override;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    Bytes pending_;
};

/// Flat key-value store: an in-memory hot map in front of an append-only
/// cold region, with every write logged to the WAL first. The hot/cold
/// split is representation only; durability and recovery come solely from
/// the WAL.
class FlatStore {
public:
    explicit FlatStore(std::unique_ptr<WalSink> sink);

    /// Rebuilds a store by replaying a log. Applies complete,
    /// checksum-valid records up to the last height marker; updates past it
    /// belong to a torn block and are discarded. Throws WalCorruptionError
    /// for mid-log corruption.
    static FlatStore replay(ByteView log, std::unique_ptr<WalSink> sink);

    /// Appends WAL records (one per write, then a height marker) and applies
    /// the writes to the hot map. Returns without waiting for durability.
    /// Heights must be contiguous. A zero value erases the entry.
    void apply_block(uint64_t height, const std::map<Location, Bytes32>& writes);

    std::optional<Bytes32> get(const Location& key) const;

    /// Moves hot entries last written at least `min_idle_blocks` ago to the
    /// cold region. Reads are unaffected.
    size_t demote_cold(uint64_t min_idle_blocks);

    /// Durability barrier for tests and shutdown.
    void flush() { sink_->flush(); }

    uint64_t last_height() const { return last_height_; }
    uint64_t next_seq() const { return next_seq_; }
    bool failed() const { return failed_; }
    size_t hot_size() const { return hot_.size(); }
    size_t cold_size() const { return cold_index_.size(); }
    uint64_t cold_reads() const { return cold_reads_; }
    const WalSink& sink() const { return *sink_; }

    /// hot ∪ cold, for audits and commitment recomputes.
    std::map<Location, Bytes32> contents() const;

private:
    struct HotEntry {
        Bytes32 value;
        uint64_t last_write_height = 0;
    };

    std::unique_ptr<WalSink> sink_;
    std::map<Location, HotEntry> hot_;
    std::vector<std::pair<Location, Bytes32>> cold_;  // append-only
    std::map<Location, size_t> cold_index_;
    uint64_t last_height_ = 0;
    uint64_t next_seq_ = 0;
    bool failed_ = false;
    mutable uint64_t cold_reads_ = 0;
};

}  // namespace lanebft
