// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/wal.hpp>

#include <zlib.h>

#include <fstream>

namespace lanebft {

namespace {

uint32_t checksum_of(ByteView body) {
    return static_cast<uint32_t>(crc32(crc32(0L, Z_NULL, 0), body.data(), static_cast<uInt>(body.size())));
}

Bytes encode_body(const WalRecord& record) {
    ByteWriter w;
    w.u64(record.seq);
    w.u64(record.height);
    w.u8(static_cast<uint8_t>(record.kind));
    if (record.kind == WalRecordKind::kUpdate) {
        Bytes key = record.key.encode();
        w.u16(static_cast<uint16_t>(key.size()));
        w.raw(key);
        w.u8(record.old_value ? 1 : 0);
        if (record.old_value)
            w.raw(record.old_value->bytes);
        w.u8(record.new_value ? 1 : 0);
        if (record.new_value)
            w.raw(record.new_value->bytes);
    }
    return w.take();
}

WalRecord decode_body(ByteView body, size_t frame_offset) {
    try {
        ByteReader r(body);
        WalRecord record;
        record.seq = r.u64();
        record.height = r.u64();
        uint8_t kind = r.u8();
        if (kind > static_cast<uint8_t>(WalRecordKind::kHeightMarker))
            throw WalCorruptionError("unknown record kind", frame_offset);
        record.kind = static_cast<WalRecordKind>(kind);
        if (record.kind == WalRecordKind::kUpdate) {
            uint16_t key_len = r.u16();
            record.key = Location::decode(r.bytes(key_len));
            if (r.u8()) {
                Bytes32 v;
                v.bytes = r.array<32>();
                record.old_value = v;
            }
            if (r.u8()) {
                Bytes32 v;
                v.bytes = r.array<32>();
                record.new_value = v;
            }
        }
        if (!r.eof())
            throw WalCorruptionError("trailing bytes in record body", frame_offset);
        return record;
    } catch (const DecodeError&) {
        throw WalCorruptionError("malformed record body", frame_offset);
    }
}

}  // namespace

Bytes encode_wal_record(const WalRecord& record) {
    Bytes body = encode_body(record);
    ByteWriter w;
    w.u32(static_cast<uint32_t>(body.size()));
    w.raw(body);
    w.u32(checksum_of(ByteView(body.data(), body.size())));
    return w.take();
}

WalScan scan_wal(ByteView log) {
    WalScan scan;
    size_t pos = 0;
    while (pos < log.size()) {
        size_t frame_start = pos;
        if (log.size() - pos < 4) {
            scan.torn_tail = true;
            scan.torn_offset = frame_start;
            return scan;
        }
        uint32_t len = 0;
        for (int i = 0; i < 4; ++i)
            len = len << 8 | log[pos + i];
        if (log.size() - pos < 4ull + len + 4) {
            // Frame extends past the end: a crash mid-append.
            scan.torn_tail = true;
            scan.torn_offset = frame_start;
            return scan;
        }
        ByteView body = log.subspan(pos + 4, len);
        uint32_t stored = 0;
        for (int i = 0; i < 4; ++i)
            stored = stored << 8 | log[pos + 4 + len + i];
        if (stored != checksum_of(body))
            throw WalCorruptionError("checksum mismatch", frame_start);
        scan.records.push_back(decode_body(body, frame_start));
        pos += 4ull + len + 4;
    }
    return scan;
}

Bytes MemoryWalSink::all_bytes() const {
    Bytes out = durable_;
    out.insert(out.end(), pending_.begin(), pending_.end());
    return out;
}

FileWalSink::FileWalSink(std::filesystem::path path) : path_(std::move(path)) {
    std::ofstream f(path_, std::ios::binary | std::ios::app);
    if (!f)
        throw std::runtime_error("cannot open WAL file: " + path_.string());
}

void FileWalSink::append(ByteView data) {
    pending_.insert(pending_.end(), data.begin(), data.end());
}

void FileWalSink::flush() {
    std::ofstream f(path_, std::ios::binary | std::ios::app);
    f.write(reinterpret_cast<const char*>(pending_.data()), static_cast<std::streamsize>(pending_.size()));
    f.flush();
    if (!f)
        throw std::runtime_error("WAL write failed: " + path_.string());
    pending_.clear();
}

Bytes FileWalSink::durable_bytes() const {
    std::ifstream f(path_, std::ios::binary);
    return Bytes(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

FlatStore::FlatStore(std::unique_ptr<WalSink> sink) : sink_(std::move(sink)) {}

FlatStore FlatStore::replay(ByteView log, std::unique_ptr<WalSink> sink) {
    WalScan scan = scan_wal(log);
    FlatStore store(std::move(sink));

    // Updates only become visible at their block's height marker, so a torn
    // block never surfaces.
    std::vector<WalRecord> block;
    for (const auto& record : scan.records) {
        if (record.kind == WalRecordKind::kUpdate) {
            block.push_back(record);
            continue;
        }
        for (const auto& update : block) {
            Bytes32 value = update.new_value ? *update.new_value : Bytes32{};
            if (value.is_zero())
                store.hot_.erase(update.key);
            else
                store.hot_[update.key] = HotEntry{value, record.height};
        }
        block.clear();
        store.last_height_ = record.height;
        store.next_seq_ = record.seq + 1;
    }
    return store;
}

void FlatStore::apply_block(uint64_t height, const std::map<Location, Bytes32>& writes) {
    if (failed_)
        throw std::runtime_error("store is in read-only failed state");
    if (height != last_height_ + 1)
        throw std::invalid_argument("apply_block: height gap");

    try {
        for (const auto& [key, value] : writes) {
            WalRecord record;
            record.seq = next_seq_++;
            record.height = height;
            record.kind = WalRecordKind::kUpdate;
            record.key = key;
            record.old_value = get(key);
            if (!value.is_zero())
                record.new_value = value;
            Bytes frame = encode_wal_record(record);
            sink_->append(ByteView(frame.data(), frame.size()));
        }
        WalRecord marker;
        marker.seq = next_seq_++;
        marker.height = height;
        marker.kind = WalRecordKind::kHeightMarker;
        Bytes frame = encode_wal_record(marker);
        sink_->append(ByteView(frame.data(), frame.size()));
    } catch (...) {
        failed_ = true;
        throw;
    }

    for (const auto& [key, value] : writes) {
        if (value.is_zero()) {
            hot_.erase(key);
        } else {
            hot_[key] = HotEntry{value, height};
        }
        auto cold = cold_index_.find(key);
        if (cold != cold_index_.end())
            cold_index_.erase(cold);
    }
    last_height_ = height;
}

std::optional<Bytes32> FlatStore::get(const Location& key) const {
    auto hot = hot_.find(key);
    if (hot != hot_.end())
        return hot->second.value;
    auto cold = cold_index_.find(key);
    if (cold != cold_index_.end()) {
        ++cold_reads_;
        return cold_[cold->second].second;
    }
    return std::nullopt;
}

size_t FlatStore::demote_cold(uint64_t min_idle_blocks) {
    size_t moved = 0;
    for (auto it = hot_.begin(); it != hot_.end();) {
        if (it->second.last_write_height + min_idle_blocks <= last_height_) {
            cold_.emplace_back(it->first, it->second.value);
            cold_index_[it->first] = cold_.size() - 1;
            it = hot_.erase(it);
            ++moved;
        } else {
            ++it;
        }
    }
    return moved;
}

std::map<Location, Bytes32> FlatStore::contents() const {
    std::map<Location, Bytes32> out;
    for (const auto& [key, index] : cold_index_)
        out[key] = cold_[index].second;
    for (const auto& [key, entry] : hot_)
        out[key] = entry.value;
    return out;
}

}  // namespace lanebft
