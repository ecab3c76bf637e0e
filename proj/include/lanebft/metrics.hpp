// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lanebft/crypto.hpp>

#include <span>
#include <string>

namespace lanebft {

/// Everything the metrics summary needs is recorded as trace events, so the
/// summary can be recomputed offline from a trace file.
enum class TraceKind : uint8_t {
    kCarProposed = 1,        // a=pos b=batch_size c=heartbeat digest=car
    kCarVoteRejected = 2,    // a=lane b=pos c=reason
    kPoAFormed = 3,          // a=pos b=lane digest=car
    kCutProposed = 4,        // a=slot b=view digest=cut
    kPrepareQcFormed = 5,    // a=slot b=view digest=cut
    kViewChange = 6,         // a=slot b=new_view
    kCommitted = 7,          // a=slot b=view digest=cut
    kBlockExecuted = 8,      // a=height b=txs c=occ_aborts d=duplicates digest=state commitment
    kExecFallback = 9,       // a=height
    kAttested = 10,          // a=height digest=commitment
    kStateQuorum = 11,       // a=height b=committed_at c=lag
    kHalted = 12,            // a=height
    kFetchRequested = 13,    // a=lane digest=car
    kFetchServed = 14,       // digest=car
    kFetchCompleted = 15,    // a=lane digest=car
    kEquivocationSeen = 16,  // a=lane b=pos
    kInclusionFlag = 17,     // a=slot b=lane
    kClientTx = 18,          // a=lane b=duplicate digest=tx
};

const char* trace_kind_name(TraceKind kind);

struct TraceEvent {
    uint64_t t_ms = 0;
    int32_t replica = -1;  // -1 = harness scope
    TraceKind kind = TraceKind::kCarProposed;
    uint64_t a = 0;
    uint64_t b = 0;
    uint64_t c = 0;
    uint64_t d = 0;
    Digest digest;
};

/// Canonical line form, identical across runs and platforms for equal
/// events; the trace file is these lines. The digest folds the whole trace
/// into one determinism check.
std::string trace_line(const TraceEvent& event);
Digest trace_digest(std::span<const TraceEvent> trace);
std::vector<TraceEvent> parse_trace(const std::string& text);

struct Metrics {
    uint64_t committed_cuts = 0;
    double mean_commit_latency_ms = 0;
    double median_commit_latency_ms = 0;
    double mean_commit_latency_rt = 0;
    double mean_commit_interval_ms = 0;
    double mean_commit_interval_rt = 0;
    uint64_t view_changes = 0;
    uint64_t fetches = 0;
    uint64_t fetches_completed = 0;
    uint64_t occ_aborts = 0;
    uint64_t exec_fallbacks = 0;
    uint64_t blocks_executed = 0;
    uint64_t txs_executed = 0;
    uint64_t duplicates_skipped = 0;
    uint64_t max_state_lag = 0;
    double mean_state_lag = 0;
    uint64_t state_quorum_heights = 0;
    bool halted = false;
    uint64_t cars_proposed = 0;
    uint64_t heartbeat_cars = 0;
    uint64_t poas_formed = 0;
    uint64_t equivocations_seen = 0;
    uint64_t inclusion_flags = 0;
    uint64_t client_txs = 0;
    uint64_t client_duplicates = 0;
};

/// Derives the summary from the trace alone. Commit latency of a slot is
/// the median across replicas of (commit time - proposal time of the
/// committing view); the mean skips `warmup_slots` at the start and is also
/// reported in round trips (round_trip_ms = twice the one-way delay).
/// Per-replica execution counters come from replica 0's events.
Metrics compute_metrics(std::span<const TraceEvent> trace, double round_trip_ms,
                        uint64_t warmup_slots = 5);

std::string metrics_table(const Metrics& m);
std::string metrics_json(const Metrics& m);

}  // namespace lanebft
