// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lanebft/tx.hpp>

#include <functional>
#include <map>
#include <set>

namespace lanebft {

enum class LocationKind : uint8_t {
    kBalance = 0,
    kNonce = 1,
    kSlot = 2,
};

/// Addressable unit of state: an account balance, an account nonce, or one
/// 32-byte contract storage slot. Totally ordered (kind, address, key) so
/// every iteration over locations is deterministic.
struct Location {
    LocationKind kind = LocationKind::kBalance;
    Address addr;
    Bytes32 key;  // zero unless kind == kSlot

    auto operator<=>(const Location&) const = default;

    static Location balance(const Address& a) { return {LocationKind::kBalance, a, {}}; }
    static Location nonce(const Address& a) { return {LocationKind::kNonce, a, {}}; }
    static Location slot(const Address& a, const Bytes32& k) { return {LocationKind::kSlot, a, k}; }

    /// Canonical encoding: kind(1) | address(20) | key(32, slots only).
    Bytes encode() const;
    static Location decode(ByteView data);
};

// Value conventions for the flat map: a zero value is identical to an
// absent entry, balances are 32-byte big-endian, nonces occupy the low
// 8 bytes.
Bytes32 balance_value(const u256& v);
Bytes32 nonce_value(uint64_t v);
u256 value_as_u256(const Bytes32& v);
uint64_t value_low_u64(const Bytes32& v);

/// Flat account/slot map. Entries with zero values are never stored.
struct WorldState {
    std::map<Location, Bytes32> entries;
    uint64_t height = 0;

    std::optional<Bytes32> get(const Location& loc) const;
    void set(const Location& loc, const Bytes32& value);  // zero value erases

    u256 balance_of(const Address& a) const;
    uint64_t nonce_of(const Address& a) const;
    Bytes32 slot_of(const Address& a, const Bytes32& key) const;

    bool operator==(const WorldState&) const = default;
};

/// Read interface executions run against; lets the parallel executor
/// substitute versioned views without touching execution semantics.
class StateView {
public:
    virtual ~StateView() = default;
    virtual std::optional<Bytes32> get(const Location& loc) const = 0;
};

class WorldStateView : public StateView {
public:
    explicit WorldStateView(const WorldState& state) : state_(state) {}
    std::optional<Bytes32> get(const Location& loc) const override { return state_.get(loc); }

private:
    const WorldState& state_;
};

enum class FailReason : uint8_t {
    kNone = 0,
    kBadNonce,
    kInsufficientBalance,
    kMalformedPayload,
};

const char* fail_reason_name(FailReason r);

/// Execution outcome of one transaction: its status plus the exact read and
/// write sets, which drive both conflict detection and state application.
/// A failed transaction writes at most the sender nonce (replay protection);
/// a nonce mismatch writes nothing at all.
struct Receipt {
    Digest tx_digest;
    bool success = false;
    FailReason reason = FailReason::kNone;
    std::set<Location> reads;
    std::map<Location, Bytes32> writes;

    bool operator==(const Receipt&) const = default;
};

// Toy payload program, executed against `to`'s storage. input empty or
// input[0] == 0 means a plain transfer of `value`; otherwise input[0] is the
// opcode count (bounded by its one-byte width) followed by that many ops:
//   0x01 SSTORE    slot(32) value(32)
//   0x02 SLOAD_ADD slot(32)          acc += low 8 bytes of slot, then the
//                                    accumulator is stored to kResultSlot
//   0x03 TRANSFER  addr(20) amt(8BE) moves native units sender -> addr
// Opcode-list transactions do not transfer `value`. Trailing bytes after the
// last opcode make the payload malformed.
inline constexpr uint8_t kOpSstore = 0x01;
inline constexpr uint8_t kOpSloadAdd = 0x02;
inline constexpr uint8_t kOpTransfer = 0x03;

inline Bytes32 result_slot() {
    Bytes32 s;
    s.bytes.fill(0xee);
    return s;
}

/// Deterministic function of (view, tx). Never throws: failures are encoded
/// in the receipt, and block execution continues past failed transactions.
Receipt exec_transaction(const StateView& view, const Transaction& tx);

void apply_receipt(WorldState& state, const Receipt& receipt);

struct BlockResult {
    WorldState state;
    std::vector<Receipt> receipts;
};

/// Left fold of exec_transaction in the given order; the reference oracle
/// for the parallel executor.
BlockResult exec_block_sequential(const WorldState& base, std::span<const Transaction> txs);

u256 total_balance(const WorldState& state);

}  // namespace lanebft
