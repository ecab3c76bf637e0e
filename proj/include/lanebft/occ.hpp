// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lanebft/state.hpp>

#include <cstdint>
#include <utility>

namespace lanebft {

/// Dependency edges (j, i): t_j depends on t_i exactly when j > i and some
/// element of W_i intersects R_j union W_j. Acyclic by construction since
/// edges always point from higher to lower index.
std::set<std::pair<uint32_t, uint32_t>> dependency_edges(std::span<const Receipt> receipts);

/// Validation predicate for one executed transaction: a conflict exists iff
/// some write committed by a lower-index transaction after this incarnation
/// began touches the receipt's read or write set. `committed_writes` holds
/// (writer index, location) pairs; writers in [started_at, index) count.
bool occ_conflict(const Receipt& receipt,
                  std::span<const std::pair<uint32_t, Location>> committed_writes,
                  uint32_t started_at, uint32_t index);

struct ExecStats {
    uint64_t executions = 0;  // exec_transaction invocations, incarnations included
    uint64_t aborts = 0;      // rolled-back incarnations
    bool fallback = false;    // whole block re-ran sequentially
    double wall_ms = 0.0;

    bool operator==(const ExecStats&) const = default;
};

struct OccConfig {
    enum class Mode : uint8_t {
        kThreads,        // real worker threads
        kDeterministic,  // single-thread scheduler, interleaving from sched_seed
    };

    uint32_t workers = 4;
    uint32_t retry_budget = 4;  // sequential fallback once aborts > retry_budget * |txs|
    Mode mode = Mode::kThreads;
    uint64_t sched_seed = 0;
    /// Deterministic mode only: schedule validations before dependencies
    /// commit, forcing rollbacks and, with a small budget, the fallback path.
    bool adversarial = false;
};

struct ParallelResult {
    WorldState state;
    std::vector<Receipt> receipts;
    ExecStats stats;
};

/// Optimistic parallel execution of one block. Transactions run optimistically
/// against the committed prefix, are validated, and commit strictly in index
/// order, so the final state and every receipt are identical to
/// exec_block_sequential over the same input. Only the stats depend on the
/// schedule.
ParallelResult exec_block_parallel(const WorldState& base, std::span<const Transaction> txs,
                                   const OccConfig& config);

}  // namespace lanebft
