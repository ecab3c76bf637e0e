// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lanebft/replica.hpp>

#include <memory>
#include <queue>
#include <random>

namespace lanebft {

struct DelayModel {
    enum class Dist : uint8_t { kFixed, kUniform };
    Dist dist = Dist::kFixed;
    uint64_t min_ms = 50;
    uint64_t max_ms = 50;

    double median_ms() const {
        return dist == Dist::kFixed ? static_cast<double>(min_ms)
                                    : (static_cast<double>(min_ms) + static_cast<double>(max_ms)) / 2.0;
    }
};

enum class FaultBehavior : uint8_t {
    kCrash,
    kSilentLeader,
    kEquivocateLane,
    kWithholdBatch,
    kWrongStateRoot,
    kOmitCertifiedTip,
};

struct FaultSpec {
    ReplicaId replica = 0;
    FaultBehavior behavior = FaultBehavior::kCrash;
    uint64_t from_ms = 0;
    uint64_t to_ms = UINT64_MAX;
    uint64_t param = 1;  // wrong_state_root bias byte
};

/// Partial-synchrony network model: one-way delays follow pre_gst before
/// the global stabilization time and post_gst after it. Messages are never
/// dropped, only delayed; loss is modeled as unbounded pre-GST delay.
struct NetConfig {
    uint32_t n = 4;
    uint32_t f = 1;
    uint64_t seed = 1;
    DelayModel pre_gst{DelayModel::Dist::kFixed, 50, 50};
    DelayModel post_gst{DelayModel::Dist::kFixed, 50, 50};
    uint64_t gst_ms = 0;
    std::vector<uint64_t> stakes;  // empty = equal stakes
    std::vector<FaultSpec> faults;
    bool allow_fault_overflow = false;  // negative tests may exceed f

    void validate() const;  // n = 3f+1, fault budget, stake shape
};

struct WorkloadConfig {
    double tx_rate_per_lane = 10.0;  // transactions per second per lane
    uint64_t duration_ms = 10000;
    double w_transfer = 0.7;
    double w_sstore = 0.15;
    double w_sload_add = 0.1;
    double w_overdraft = 0.05;
    uint32_t hot_slots = 16;  // fewer = more execution conflicts
    double duplicate_fraction = 0.0;  // share also submitted to a second lane
    uint32_t accounts_per_lane = 8;
    u256 initial_balance = 1'000'000;
};

struct SimConfig {
    NetConfig net;
    ReplicaConfig replica;  // n, f, stakes and faults are filled in per replica
    WorkloadConfig workload;
    uint64_t duration_ms = 15000;
    /// Genesis override; by default every workload account is funded with
    /// workload.initial_balance.
    std::optional<std::vector<std::pair<Address, u256>>> genesis;
};

struct SimResult {
    bool violation = false;
    std::string violation_message;
    uint64_t seed = 0;
    Metrics metrics;
};

Address sim_account_address(uint32_t index);
Address sim_contract_address();
std::vector<std::pair<Address, u256>> workload_genesis(const NetConfig& net,
                                                       const WorkloadConfig& workload);

/// Deterministic discrete-event simulation: a single queue of envelopes,
/// timers and client injections ordered by (time, recipient, sequence).
/// All events at one (time, recipient) form a batch; quorum thresholds are
/// evaluated at batch end. Identical configs and seeds give byte-identical
/// traces.
class Simulation {
public:
    explicit Simulation(SimConfig config);
    ~Simulation();

    SimResult run();

    Replica& replica(ReplicaId r) { return *replicas_[r]; }
    const Replica& replica(ReplicaId r) const { return *replicas_[r]; }
    uint32_t replica_count() const { return static_cast<uint32_t>(replicas_.size()); }
    const std::vector<TraceEvent>& trace() const { return trace_; }
    const KeyRegistry& keys() const { return keys_; }
    double round_trip_ms() const { return 2.0 * config_.net.post_gst.median_ms(); }
    bool correct(ReplicaId r) const { return !faulty_.contains(r); }

private:
    friend class SimContext;

    struct Event {
        uint64_t time = 0;
        ReplicaId to = 0;
        uint64_t seq = 0;
        enum class Type : uint8_t { kDeliver, kTimer, kInject } type = Type::kDeliver;
        ReplicaId from = 0;
        Bytes payload;
        uint64_t timer_id = 0;
        bool duplicate = false;  // inject: second submission of the same tx
    };

    struct EventOrder {
        bool operator()(const std::shared_ptr<Event>& a, const std::shared_ptr<Event>& b) const {
            return std::tie(a->time, a->to, a->seq) > std::tie(b->time, b->to, b->seq);
        }
    };

    void push(Event event);
    uint64_t sample_delay(uint64_t send_ms);
    void build_workload();
    bool crashed(ReplicaId r, uint64_t at_ms) const;
    void record_trace(int32_t replica, TraceKind kind, uint64_t a, uint64_t b, uint64_t c,
                      uint64_t d, const Digest& digest);
    void record_violation(const std::string& message);

    SimConfig config_;
    KeyRegistry keys_;
    std::vector<std::unique_ptr<Replica>> replicas_;
    std::priority_queue<std::shared_ptr<Event>, std::vector<std::shared_ptr<Event>>, EventOrder>
        queue_;
    std::mt19937_64 rng_;
    uint64_t next_seq_ = 0;
    uint64_t now_ms_ = 0;
    std::vector<TraceEvent> trace_;
    std::map<uint64_t, Digest> committed_digests_;  // cross-replica safety audit
    std::map<ReplicaId, uint64_t> crash_at_;
    std::set<ReplicaId> faulty_;
    bool violation_ = false;
    std::string violation_message_;
};

}  // namespace lanebft
