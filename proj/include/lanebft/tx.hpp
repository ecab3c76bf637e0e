// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lanebft/crypto.hpp>

#include <optional>

namespace lanebft {

// Transaction kind tags. The codec carries the tag opaquely; semantics are
// assigned at execution.
inline constexpr uint8_t kTxTypeUser = 0x00;
inline constexpr uint8_t kTxTypeAttestation = 0x01;

struct AccessListEntry {
    Address address;
    std::vector<Bytes32> storage_keys;

    auto operator<=>(const AccessListEntry&) const = default;
};

/// Flat-codec transaction.
///
/// Wire layout, in order:
///   tx_type(1) | chain_id(8 BE) | sender(20) | to_marker(1) | [to(20)] |
///   value(len(1) + minimal BE bytes) | nonce(8 BE) | gas_limit(8 BE) |
///   gas_price(len(1) + minimal BE bytes) | signature(65) |
///   access_list_count(2 BE) | per entry: address(20), key_count(2 BE),
///   keys(32 each) | input(all remaining bytes, no prefix)
///
/// to_marker is 0x00 for contract creation (no address follows) and 0x01
/// when 20 address bytes follow. Variable-length integers are minimal:
/// no leading zero byte, zero encodes with length 0. Field widths are
/// enforced by the types here, so encoding cannot fail.
struct Transaction {
    uint8_t tx_type = kTxTypeUser;
    uint64_t chain_id = 0;
    Address sender;
    std::optional<Address> to;
    u256 value = 0;
    uint64_t nonce = 0;
    uint64_t gas_limit = 0;
    u256 gas_price = 0;
    std::vector<AccessListEntry> access_list;
    std::array<uint8_t, 65> signature{};
    Bytes input;

    bool operator==(const Transaction&) const = default;
};

Bytes encode_transaction(const Transaction& tx);

/// Single forward pass, no backtracking. Throws DecodeError (with the byte
/// offset) on truncation, a to_marker outside {0x00, 0x01}, a length prefix
/// above 32, or a non-minimal integer encoding. Once the fixed fields and
/// access list are consumed, all remaining bytes become `input`.
Transaction decode_transaction(ByteView payload);

/// Digest of the canonical encoding. Used for dedup and receipts.
Digest tx_digest(const Transaction& tx);

}  // namespace lanebft
