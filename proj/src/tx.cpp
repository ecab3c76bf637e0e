// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/tx.hpp>

namespace lanebft {

namespace {

void put_minimal_u256(ByteWriter& w, const u256& v) {
    Bytes raw = u256_minimal_be(v);
    w.u8(static_cast<uint8_t>(raw.size()));
    w.raw(raw);
}

u256 read_minimal_u256(ByteReader& r) {
    size_t len_at = r.pos();
    uint8_t len = r.u8();
    if (len > 32)
        throw DecodeError("integer length prefix above 32", len_at);
    ByteView raw = r.bytes(len);
    if (len > 0 && raw[0] == 0x00)
        throw DecodeError("non-minimal integer encoding", len_at + 1);
    return u256_from_be(raw);
}

}  // namespace

Bytes encode_transaction(const Transaction& tx) {
    ByteWriter w;
    w.u8(tx.tx_type);
    w.u64(tx.chain_id);
    w.raw(tx.sender.bytes);
    if (tx.to) {
        w.u8(0x01);
        w.raw(tx.to->bytes);
    } else {
        w.u8(0x00);
    }
    put_minimal_u256(w, tx.value);
    w.u64(tx.nonce);
    w.u64(tx.gas_limit);
    put_minimal_u256(w, tx.gas_price);
    w.raw(tx.signature);
    w.u16(static_cast<uint16_t>(tx.access_list.size()));
    for (const auto& entry : tx.access_list) {
        w.raw(entry.address.bytes);
        w.u16(static_cast<uint16_t>(entry.storage_keys.size()));
        for (const auto& key : entry.storage_keys)
            w.raw(key.bytes);
    }
    w.raw(tx.input);
    return w.take();
}

Transaction decode_transaction(ByteView payload) {
    ByteReader r(payload);
    Transaction tx;
    tx.tx_type = r.u8();
    tx.chain_id = r.u64();
    tx.sender.bytes = r.array<20>();
    size_t marker_at = r.pos();
    uint8_t marker = r.u8();
    if (marker == 0x01) {
        Address to;
        to.bytes = r.array<20>();
        tx.to = to;
    } else if (marker != 0x00) {
        throw DecodeError("to_marker not in {0x00, 0x01}", marker_at);
    }
    tx.value = read_minimal_u256(r);
    tx.nonce = r.u64();
    tx.gas_limit = r.u64();
    tx.gas_price = read_minimal_u256(r);
    tx.signature = r.array<65>();
    uint16_t entries = r.u16();
    tx.access_list.reserve(std::min<size_t>(entries, r.remaining() / 22 + 1));
    for (uint16_t i = 0; i < entries; ++i) {
        AccessListEntry entry;
        entry.address.bytes = r.array<20>();
        uint16_t keys = r.u16();
        entry.storage_keys.reserve(std::min<size_t>(keys, r.remaining() / 32 + 1));
        for (uint16_t j = 0; j < keys; ++j) {
            Bytes32 key;
            key.bytes = r.array<32>();
            entry.storage_keys.push_back(key);
        }
        tx.access_list.push_back(std::move(entry));
    }
    ByteView input = r.rest();
    tx.input.assign(input.begin(), input.end());
    return tx;
}

Digest tx_digest(const Transaction& tx) {
    return sha256(encode_transaction(tx));
}

}  // namespace lanebft
