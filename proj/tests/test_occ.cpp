// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/commitment.hpp>
#include <lanebft/occ.hpp>

#include <doctest.h>

#include "helpers.hpp"

using namespace lanebft;
using namespace lanebft::test;

namespace {

Receipt receipt_with(std::set<Location> reads, std::vector<Location> writes) {
    Receipt r;
    r.reads = std::move(reads);
    for (const auto& loc : writes)
        r.writes[loc] = nonce_value(1);
    return r;
}

void check_against_oracle(const WorldState& base, const std::vector<Transaction>& txs,
                          const OccConfig& config) {
    BlockResult oracle = exec_block_sequential(base, txs);
    ParallelResult parallel = exec_block_parallel(base, txs, config);
    REQUIRE(parallel.state == oracle.state);
    REQUIRE(parallel.receipts.size() == oracle.receipts.size());
    for (size_t i = 0; i < oracle.receipts.size(); ++i)
        REQUIRE(parallel.receipts[i] == oracle.receipts[i]);
}

}  // namespace

TEST_CASE("dependency edges follow the intersection rule") {
    Location x = Location::slot(test_address(1), test_slot_key(1));
    Location y = Location::slot(test_address(1), test_slot_key(2));

    SUBCASE("write-read produces an edge") {
        std::vector<Receipt> receipts = {
            receipt_with({}, {x}),
            receipt_with({x}, {}),
        };
        auto edges = dependency_edges(receipts);
        CHECK(edges == std::set<std::pair<uint32_t, uint32_t>>{{1, 0}});
    }

    SUBCASE("disjoint sets produce no edges") {
        std::vector<Receipt> receipts = {
            receipt_with({}, {x}),
            receipt_with({y}, {y}),
        };
        CHECK(dependency_edges(receipts).empty());
    }

    SUBCASE("write-write produces an edge even without reads") {
        std::vector<Receipt> receipts = {
            receipt_with({}, {x}),
            receipt_with({}, {x}),
        };
        CHECK(dependency_edges(receipts) == std::set<std::pair<uint32_t, uint32_t>>{{1, 0}});
    }

    SUBCASE("edges always point from higher to lower index") {
        BlockGen gen(3, 8, 0.6);
        WorldState state = gen.genesis();
        BlockResult result = exec_block_sequential(state, gen.block(60));
        for (auto [j, i] : dependency_edges(result.receipts))
            CHECK(j > i);
    }
}

TEST_CASE("disjoint transfers run in parallel without aborts") {
    WorldState state;
    std::vector<Transaction> txs;
    for (uint32_t i = 0; i < 32; ++i) {
        state.set(Location::balance(test_address(i)), balance_value(1000));
        Transaction tx;
        tx.sender = test_address(i);
        tx.to = test_address(100 + i);
        tx.value = 10;
        tx.nonce = 0;
        txs.push_back(tx);
    }
    OccConfig config;
    config.workers = 4;
    ParallelResult parallel = exec_block_parallel(state, txs, config);
    BlockResult oracle = exec_block_sequential(state, txs);
    CHECK(parallel.state == oracle.state);
    CHECK(parallel.stats.aborts == 0);
    CHECK(!parallel.stats.fallback);
}

TEST_CASE("one hot slot forces aborts but still matches the oracle") {
    WorldState state;
    Address contract = test_address(1000);
    Bytes32 hot = test_slot_key(0);
    std::vector<Transaction> txs;
    for (uint32_t i = 0; i < 100; ++i) {
        state.set(Location::balance(test_address(i)), balance_value(1000));
        Transaction tx;
        tx.sender = test_address(i);
        tx.to = contract;
        tx.nonce = 0;
        tx.input = sload_add_input(hot);
        txs.push_back(tx);
    }
    // Interleave writers so the accumulator chain actually moves.
    for (uint32_t i = 0; i < 100; i += 3)
        txs[i].input = sstore_input(hot, test_slot_key(i + 1));

    BlockResult oracle = exec_block_sequential(state, txs);

    OccConfig config;
    config.workers = 4;
    ParallelResult threaded = exec_block_parallel(state, txs, config);
    REQUIRE(threaded.state == oracle.state);
    REQUIRE(threaded.receipts == oracle.receipts);

    // Thread timing is machine-dependent, so the abort claim is checked in
    // the deterministic scheduler, which interleaves executions and commits.
    config.mode = OccConfig::Mode::kDeterministic;
    config.sched_seed = 7;
    ParallelResult scheduled = exec_block_parallel(state, txs, config);
    REQUIRE(scheduled.state == oracle.state);
    REQUIRE(scheduled.receipts == oracle.receipts);
    CHECK(scheduled.stats.aborts > 0);
}

TEST_CASE("adversarial deterministic schedules roll back and recover") {
    BlockGen gen(11, 6, 0.9);
    WorldState state = gen.genesis();
    std::vector<Transaction> txs = gen.block(40);

    OccConfig config;
    config.mode = OccConfig::Mode::kDeterministic;
    config.adversarial = true;
    config.retry_budget = 50;  // high budget: recover without fallback
    uint64_t aborts = 0;
    for (uint64_t seed = 0; seed < 10; ++seed) {
        config.sched_seed = seed;
        BlockResult oracle = exec_block_sequential(state, txs);
        ParallelResult parallel = exec_block_parallel(state, txs, config);
        REQUIRE(parallel.state == oracle.state);
        REQUIRE(parallel.receipts == oracle.receipts);
        CHECK(!parallel.stats.fallback);
        aborts += parallel.stats.aborts;
    }
    CHECK(aborts > 0);
}

TEST_CASE("deterministic mode reproduces stats for a fixed seed") {
    BlockGen gen(13, 6, 0.8);
    WorldState state = gen.genesis();
    std::vector<Transaction> txs = gen.block(50);
    OccConfig config;
    config.mode = OccConfig::Mode::kDeterministic;
    config.adversarial = true;
    config.sched_seed = 99;
    ParallelResult a = exec_block_parallel(state, txs, config);
    ParallelResult b = exec_block_parallel(state, txs, config);
    CHECK(a.stats.executions == b.stats.executions);
    CHECK(a.stats.aborts == b.stats.aborts);
    CHECK(a.state == b.state);
}

TEST_CASE("exhausting the retry budget falls back to sequential execution") {
    WorldState state;
    Address contract = test_address(1000);
    Bytes32 hot = test_slot_key(0);
    std::vector<Transaction> txs;
    for (uint32_t i = 0; i < 30; ++i) {
        state.set(Location::balance(test_address(i)), balance_value(1000));
        Transaction tx;
        tx.sender = test_address(i);
        tx.to = contract;
        tx.nonce = 0;
        tx.input = i % 2 ? sstore_input(hot, test_slot_key(i)) : sload_add_input(hot);
        txs.push_back(tx);
    }
    OccConfig config;
    config.mode = OccConfig::Mode::kDeterministic;
    config.adversarial = true;
    config.retry_budget = 1;
    bool fell_back = false;
    for (uint64_t seed = 0; seed < 50 && !fell_back; ++seed) {
        config.sched_seed = seed;
        ParallelResult parallel = exec_block_parallel(state, txs, config);
        BlockResult oracle = exec_block_sequential(state, txs);
        REQUIRE(parallel.state == oracle.state);
        REQUIRE(parallel.receipts == oracle.receipts);
        fell_back = parallel.stats.fallback;
    }
    CHECK(fell_back);
}

TEST_CASE("random blocks match the sequential oracle across workers and seeds") {
    std::mt19937_64 meta(2025);
    for (int round = 0; round < 60; ++round) {
        double density = (round % 11) / 10.0;
        BlockGen gen(meta(), 2 + round % 12, density);
        WorldState state = gen.genesis();
        std::vector<Transaction> txs = gen.block(1 + meta() % 120);

        OccConfig config;
        config.workers = 1 + round % 8;
        config.mode = round % 2 ? OccConfig::Mode::kThreads : OccConfig::Mode::kDeterministic;
        config.sched_seed = meta();
        config.adversarial = (round % 5 == 0);
        check_against_oracle(state, txs, config);
    }
}

TEST_CASE("empty block is a no-op") {
    WorldState state;
    state.set(Location::balance(test_address(0)), balance_value(7));
    OccConfig config;
    ParallelResult result = exec_block_parallel(state, {}, config);
    CHECK(result.state == state);
    CHECK(result.receipts.empty());
    CHECK(result.stats.executions == 0);
}

TEST_CASE("commit validation flags exactly the intervening intersecting writes") {
    Location x = Location::slot(test_address(1), test_slot_key(1));
    Location y = Location::slot(test_address(1), test_slot_key(2));
    Receipt r = receipt_with({x}, {y});

    SUBCASE("no intervening commits") {
        std::vector<std::pair<uint32_t, Location>> committed;
        CHECK(!occ_conflict(r, committed, 0, 3));
    }

    SUBCASE("a write to a read location after the incarnation began conflicts") {
        std::vector<std::pair<uint32_t, Location>> committed = {{1, x}};
        CHECK(occ_conflict(r, committed, 0, 3));
        // same write but already visible when the incarnation began
        CHECK(!occ_conflict(r, committed, 2, 3));
    }

    SUBCASE("a write to the receipt's own write set conflicts too") {
        std::vector<std::pair<uint32_t, Location>> committed = {{1, y}};
        CHECK(occ_conflict(r, committed, 0, 3));
    }

    SUBCASE("disjoint locations or higher writers never conflict") {
        Location z = Location::balance(test_address(9));
        std::vector<std::pair<uint32_t, Location>> committed = {{1, z}, {5, x}};
        CHECK(!occ_conflict(r, committed, 0, 3));
    }
}
