// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/state.hpp>

namespace lanebft {

Bytes Location::encode() const {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(kind));
    w.raw(addr.bytes);
    if (kind == LocationKind::kSlot)
        w.raw(key.bytes);
    return w.take();
}

Location Location::decode(ByteView data) {
    ByteReader r(data);
    Location loc;
    uint8_t kind = r.u8();
    if (kind > static_cast<uint8_t>(LocationKind::kSlot))
        throw DecodeError("unknown location kind", 0);
    loc.kind = static_cast<LocationKind>(kind);
    loc.addr.bytes = r.array<20>();
    if (loc.kind == LocationKind::kSlot)
        loc.key.bytes = r.array<32>();
    if (!r.eof())
        throw DecodeError("trailing bytes after location", r.pos());
    return loc;
}

Bytes32 balance_value(const u256& v) {
    return u256_to_be32(v);
}

Bytes32 nonce_value(uint64_t v) {
    Bytes32 out;
    for (int i = 0; i < 8; ++i)
        out.bytes[24 + i] = static_cast<uint8_t>(v >> (56 - 8 * i));
    return out;
}

u256 value_as_u256(const Bytes32& v) {
    return u256_from_be(ByteView(v.bytes.data(), v.bytes.size()));
}

uint64_t value_low_u64(const Bytes32& v) {
    return u64_from_be(ByteView(v.bytes.data() + 24, 8));
}

std::optional<Bytes32> WorldState::get(const Location& loc) const {
    auto it = entries.find(loc);
    if (it == entries.end())
        return std::nullopt;
    return it->second;
}

void WorldState::set(const Location& loc, const Bytes32& value) {
    if (value.is_zero())
        entries.erase(loc);
    else
        entries[loc] = value;
}

u256 WorldState::balance_of(const Address& a) const {
    auto v = get(Location::balance(a));
    return v ? value_as_u256(*v) : u256(0);
}

uint64_t WorldState::nonce_of(const Address& a) const {
    auto v = get(Location::nonce(a));
    return v ? value_low_u64(*v) : 0;
}

Bytes32 WorldState::slot_of(const Address& a, const Bytes32& key) const {
    auto v = get(Location::slot(a, key));
    return v ? *v : Bytes32{};
}

const char* fail_reason_name(FailReason r) {
    switch (r) {
    case FailReason::kNone: return "none";
    case FailReason::kBadNonce: return "bad_nonce";
    case FailReason::kInsufficientBalance: return "insufficient_balance";
    case FailReason::kMalformedPayload: return "malformed_payload";
    }
    return "?";
}

namespace {

/// Tracks the tx-private buffer plus the exact read/write sets. Reads are
/// recorded for every location the program touches, whether or not they are
/// satisfied by the private buffer.
class TxFrame {
public:
    explicit TxFrame(const StateView& view) : view_(view) {}

    Bytes32 read(const Location& loc) {
        reads_.insert(loc);
        auto it = buffer_.find(loc);
        if (it != buffer_.end())
            return it->second;
        auto v = view_.get(loc);
        return v ? *v : Bytes32{};
    }

    void write(const Location& loc, const Bytes32& value) { buffer_[loc] = value; }

    u256 read_balance(const Address& a) { return value_as_u256(read(Location::balance(a))); }
    uint64_t read_nonce(const Address& a) { return value_low_u64(read(Location::nonce(a))); }

    std::set<Location> take_reads() { return std::move(reads_); }
    std::map<Location, Bytes32> take_writes() { return std::move(buffer_); }
    void drop_writes() { buffer_.clear(); }

private:
    const StateView& view_;
    std::set<Location> reads_;
    std::map<Location, Bytes32> buffer_;
};

bool run_payload_program(TxFrame& frame, const Transaction& tx, FailReason& reason) {
    const Address& target = *tx.to;
    ByteReader r(ByteView(tx.input.data(), tx.input.size()));
    uint8_t op_count = 0;
    uint64_t acc = 0;
    try {
        op_count = r.u8();
        for (uint8_t i = 0; i < op_count; ++i) {
            uint8_t op = r.u8();
            switch (op) {
            case kOpSstore: {
                Bytes32 slot, value;
                slot.bytes = r.array<32>();
                value.bytes = r.array<32>();
                frame.write(Location::slot(target, slot), value);
                break;
            }
            case kOpSloadAdd: {
                Bytes32 slot;
                slot.bytes = r.array<32>();
                acc += value_low_u64(frame.read(Location::slot(target, slot)));
                frame.write(Location::slot(target, result_slot()), nonce_value(acc));
                break;
            }
            case kOpTransfer: {
                Address dest;
                dest.bytes = r.array<20>();
                u256 amount = r.u64();
                u256 from_balance = frame.read_balance(tx.sender);
                if (from_balance < amount) {
                    reason = FailReason::kInsufficientBalance;
                    return false;
                }
                frame.write(Location::balance(tx.sender), balance_value(from_balance - amount));
                u256 to_balance = frame.read_balance(dest);
                frame.write(Location::balance(dest), balance_value(to_balance + amount));
                break;
            }
            default:
                reason = FailReason::kMalformedPayload;
                return false;
            }
        }
    } catch (const DecodeError&) {
        reason = FailReason::kMalformedPayload;
        return false;
    }
    if (!r.eof()) {
        reason = FailReason::kMalformedPayload;
        return false;
    }
    return true;
}

}  // namespace

Receipt exec_transaction(const StateView& view, const Transaction& tx) {
    Receipt receipt;
    receipt.tx_digest = tx_digest(tx);

    // Non-user transactions (attestation carriers) are no-ops with no
    // account semantics.
    if (tx.tx_type != kTxTypeUser) {
        receipt.success = true;
        return receipt;
    }

    TxFrame frame(view);

    uint64_t current_nonce = frame.read_nonce(tx.sender);
    if (tx.nonce != current_nonce) {
        receipt.success = false;
        receipt.reason = FailReason::kBadNonce;
        receipt.reads = frame.take_reads();
        return receipt;  // not admitted: no writes at all
    }
    Bytes32 bumped = nonce_value(current_nonce + 1);

    bool ok = true;
    FailReason reason = FailReason::kNone;
    if (!tx.to) {
        // Creation target is out of scope for the toy semantics; admitted
        // transactions without a destination succeed as no-ops.
    } else if (tx.input.empty() || tx.input[0] == 0x00) {
        if (!tx.input.empty() && tx.input.size() != 1) {
            ok = false;
            reason = FailReason::kMalformedPayload;
        } else {
            u256 from_balance = frame.read_balance(tx.sender);
            if (from_balance < tx.value) {
                ok = false;
                reason = FailReason::kInsufficientBalance;
            } else {
                frame.write(Location::balance(tx.sender), balance_value(from_balance - tx.value));
                u256 to_balance = frame.read_balance(*tx.to);
                frame.write(Location::balance(*tx.to), balance_value(to_balance + tx.value));
            }
        }
    } else {
        ok = run_payload_program(frame, tx, reason);
    }

    if (!ok)
        frame.drop_writes();
    frame.write(Location::nonce(tx.sender), bumped);

    receipt.success = ok;
    receipt.reason = reason;
    receipt.reads = frame.take_reads();
    receipt.writes = frame.take_writes();
    return receipt;
}

void apply_receipt(WorldState& state, const Receipt& receipt) {
    for (const auto& [loc, value] : receipt.writes)
        state.set(loc, value);
}

BlockResult exec_block_sequential(const WorldState& base, std::span<const Transaction> txs) {
    BlockResult result;
    result.state = base;
    result.receipts.reserve(txs.size());
    for (const auto& tx : txs) {
        WorldStateView view(result.state);
        Receipt receipt = exec_transaction(view, tx);
        apply_receipt(result.state, receipt);
        result.receipts.push_back(std::move(receipt));
    }
    return result;
}

u256 total_balance(const WorldState& state) {
    u256 sum = 0;
    for (const auto& [loc, value] : state.entries)
        if (loc.kind == LocationKind::kBalance)
            sum += value_as_u256(value);
    return sum;
}

}  // namespace lanebft
