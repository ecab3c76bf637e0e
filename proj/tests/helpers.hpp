// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lanebft/occ.hpp>
#include <lanebft/state.hpp>
#include <lanebft/tx.hpp>

#include <random>

namespace lanebft::test {

inline Address test_address(uint32_t i) {
    Address a;
    Digest d = sha256({ByteView(reinterpret_cast<const uint8_t*>("addr"), 4),
                       ByteView(reinterpret_cast<const uint8_t*>(&i), 4)});
    std::copy(d.bytes.begin(), d.bytes.begin() + 20, a.bytes.begin());
    return a;
}

inline Bytes32 test_slot_key(uint64_t i) {
    Bytes32 k;
    for (int b = 0; b < 8; ++b)
        k.bytes[24 + b] = static_cast<uint8_t>(i >> (56 - 8 * b));
    return k;
}

inline Bytes transfer_input() {
    return {};
}

inline Bytes sstore_input(const Bytes32& slot, const Bytes32& value) {
    Bytes input{1, kOpSstore};
    input.insert(input.end(), slot.bytes.begin(), slot.bytes.end());
    input.insert(input.end(), value.bytes.begin(), value.bytes.end());
    return input;
}

inline Bytes sload_add_input(const Bytes32& slot) {
    Bytes input{1, kOpSloadAdd};
    input.insert(input.end(), slot.bytes.begin(), slot.bytes.end());
    return input;
}

/// Deterministic generator of structurally valid transactions (for codec
/// fuzzing) and of semantically valid blocks (for execution oracles).
class TxGen {
public:
    explicit TxGen(uint64_t seed) : rng_(seed) {}

    uint64_t u64() { return rng_(); }
    uint32_t below(uint32_t n) { return static_cast<uint32_t>(rng_() % n); }

    Transaction random_tx() {
        Transaction tx;
        tx.tx_type = static_cast<uint8_t>(below(4));
        tx.chain_id = rng_();
        tx.sender = test_address(below(64));
        if (below(8) != 0)
            tx.to = test_address(below(64));
        tx.value = random_u256();
        tx.nonce = rng_();
        tx.gas_limit = rng_();
        tx.gas_price = random_u256();
        uint32_t entries = below(4);
        for (uint32_t i = 0; i < entries; ++i) {
            AccessListEntry e;
            e.address = test_address(below(64));
            uint32_t keys = below(4);
            for (uint32_t k = 0; k < keys; ++k)
                e.storage_keys.push_back(test_slot_key(rng_()));
            tx.access_list.push_back(std::move(e));
        }
        for (auto& b : tx.signature)
            b = static_cast<uint8_t>(rng_());
        uint32_t input_len = below(64);
        tx.input.resize(input_len);
        for (auto& b : tx.input)
            b = static_cast<uint8_t>(rng_());
        return tx;
    }

private:
    u256 random_u256() {
        switch (below(4)) {
        case 0: return 0;
        case 1: return rng_() % 1000;
        case 2: return u256(rng_());
        default: {
            u256 v = rng_();
            v = (v << 64) | rng_();
            v = (v << 64) | rng_();
            return v;
        }
        }
    }

    std::mt19937_64 rng_;
};

/// Generates blocks of semantically meaningful transactions with a
/// controllable conflict profile, tracking nonces like a client would.
class BlockGen {
public:
    BlockGen(uint64_t seed, uint32_t accounts, double conflict_density)
        : rng_(seed), accounts_(accounts), conflict_density_(conflict_density) {
        nonces_.assign(accounts_, 0);
    }

    WorldState genesis(const u256& balance = 1'000'000) const {
        WorldState state;
        for (uint32_t i = 0; i < accounts_; ++i)
            state.set(Location::balance(test_address(i)), balance_value(balance));
        return state;
    }

    std::vector<Transaction> block(uint32_t txs) {
        std::vector<Transaction> out;
        out.reserve(txs);
        for (uint32_t i = 0; i < txs; ++i)
            out.push_back(next_tx());
        return out;
    }

    Transaction next_tx() {
        uint32_t sender = rng_() % accounts_;
        Transaction tx;
        tx.sender = test_address(sender);
        tx.nonce = nonces_[sender]++;
        tx.chain_id = 7;
        bool hot = std::uniform_real_distribution<double>(0, 1)(rng_) < conflict_density_;
        switch (rng_() % 4) {
        case 0: {  // transfer
            tx.to = test_address(hot ? 0 : rng_() % accounts_);
            tx.value = rng_() % 50;
            break;
        }
        case 1: {  // sstore
            tx.to = test_address(1000);  // shared contract
            Bytes32 slot = test_slot_key(hot ? rng_() % 2 : rng_() % 1024);
            tx.input = sstore_input(slot, test_slot_key(rng_()));
            break;
        }
        case 2: {  // sload_add (always also writes the result slot)
            tx.to = test_address(1000);
            Bytes32 slot = test_slot_key(hot ? rng_() % 2 : rng_() % 1024);
            tx.input = sload_add_input(slot);
            break;
        }
        default: {  // occasional overdraft, stays failed
            tx.to = test_address(rng_() % accounts_);
            tx.value = u256(1) << 200;
            break;
        }
        }
        return tx;
    }

private:
    std::mt19937_64 rng_;
    uint32_t accounts_;
    double conflict_density_;
    std::vector<uint64_t> nonces_;
};

}  // namespace lanebft::test
