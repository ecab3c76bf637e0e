// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lanebft/messages.hpp>
#include <lanebft/metrics.hpp>
#include <lanebft/occ.hpp>
#include <lanebft/wal.hpp>

#include <deque>

namespace lanebft {

/// Byzantine behaviors this replica is scripted to exhibit. Each alters only
/// this replica's outputs. Crashes are enforced by the network harness.
struct ReplicaFaults {
    bool silent_leader = false;
    uint64_t silent_from_ms = 0, silent_to_ms = UINT64_MAX;
    bool equivocate_lane = false;
    uint64_t equivocate_from_ms = 0, equivocate_to_ms = UINT64_MAX;
    bool withhold_batch = false;
    uint64_t withhold_from_ms = 0, withhold_to_ms = UINT64_MAX;
    bool wrong_state_root = false;
    uint8_t root_bias = 0x01;
    bool omit_certified_tip = false;
    uint64_t omit_from_ms = 0, omit_to_ms = UINT64_MAX;
};

struct ReplicaConfig {
    uint32_t n = 4;
    uint32_t f = 1;
    std::vector<uint64_t> stakes;  // size n

    /// On: quadratic vote dissemination and overlapped slots (1.5 round-trip
    /// commits). Off: votes go to the leader, QCs are relayed, and slots
    /// serialize (2.5 round trips).
    bool pipelining = true;

    uint32_t batch_cap = 512;
    uint64_t car_interval_ms = 100;
    bool heartbeat_cars = false;
    uint64_t timeout_ms = 2000;
    double timeout_backoff = 1.0;  // per consecutive view change on one slot
    uint32_t exec_workers = 4;
    uint64_t exec_delay_ms = 0;
    uint32_t occ_retry_budget = 4;
    uint64_t chain_id = 7;
    uint64_t state_lag_bound = 1000;  // quorum records must embed below this
    uint64_t fetch_retry_ms = 200;
    ReplicaFaults faults;
};

/// The replica's only way to affect the world: messages, timers, trace
/// events, and aborting the run on an invariant breach. Implemented by the
/// simulator; replicas never touch each other directly.
class Context {
public:
    virtual ~Context() = default;
    virtual uint64_t now_ms() const = 0;
    virtual void send(ReplicaId to, MsgKind kind, Bytes payload) = 0;
    virtual void set_timer(uint64_t at_ms, uint64_t timer_id) = 0;
    virtual void trace(TraceKind kind, uint64_t a, uint64_t b, uint64_t c, uint64_t d,
                       const Digest& digest) = 0;
    virtual void violation(const std::string& message) = 0;
};

/// One full node: lane production and voting, tip-cut consensus, post-commit
/// linearization and execution, state commitments and delayed state
/// consensus, all backed by the WAL store. Driven entirely by events.
class Replica {
public:
    Replica(ReplicaId id, ReplicaConfig config, const KeyRegistry* keys,
            const std::vector<std::pair<Address, u256>>& genesis);

    void init(Context& ctx);
    void on_message(Context& ctx, ReplicaId from, ByteView payload);
    void on_batch_end(Context& ctx);
    void on_timer(Context& ctx, uint64_t timer_id);
    void on_client_tx(Context& ctx, Bytes tx_bytes);

    // Inspection for harness audits and tests.
    ReplicaId id() const { return id_; }
    const std::vector<JournalEntry>& journal() const { return journal_; }
    const std::vector<Bytes32>& height_commitments() const { return commitments_; }
    uint64_t executed_height() const { return state_.height; }
    const WorldState& world_state() const { return state_; }
    const FlatStore& store() const { return store_; }
    const CarStore& cars() const { return cars_; }
    const Linearizer& linearizer() const { return linearizer_; }
    bool state_halted() const { return tally_.halted(); }
    uint64_t max_state_lag() const { return max_state_lag_; }
    const std::map<uint64_t, TipCut>& committed_cuts() const { return committed_; }
    const std::optional<LaneTip>& known_tip(ReplicaId lane) const { return known_tips_[lane]; }
    const std::map<uint64_t, StateQuorumRecord>& quorum_records() const { return quorum_records_; }
    uint64_t blocks_executed() const { return blocks_executed_; }

private:
    struct VoteBuckets {
        std::map<ReplicaId, Signature> prepare, commit, confirm;
    };

    struct PerView {
        std::optional<TipCut> proposal;     // validated proposal for this view
        std::map<Digest, VoteBuckets> votes;
        bool prepare_voted = false;
        bool commit_voted = false;
        bool confirm_sent = false;
        bool proposed = false;
        bool needs_confirm_relay = false;   // star mode: confirm round opened
        std::optional<QuorumCert> prepare_qc;
    };

    struct PendingCommit {
        uint64_t view = 0;
        Digest digest;
        uint32_t bitmap = 0;
    };

    struct SlotState {
        uint64_t current_view = 0;
        std::map<uint64_t, PerView> views;
        std::map<uint64_t, std::map<ReplicaId, TimeoutVoteMsg>> timeout_votes;
        std::optional<TimeoutCert> entry_tc;  // justified the current view
        std::optional<QuorumCert> high_prepare;
        std::optional<TipCut> high_prepare_cut;
        /// A commit certificate that arrived before the cut body did.
        std::optional<PendingCommit> pending_commit;
        uint32_t consecutive_timeouts = 0;
        bool committed = false;
        uint64_t committed_view = 0;
    };

    struct PendingFetch {
        ReplicaId lane = 0;
        std::vector<ReplicaId> sources;
        size_t next_source = 0;
    };

    struct TimerDesc {
        enum class Kind : uint8_t { kCarTick, kSlotTimeout, kFetchRetry, kExecDelay } kind;
        uint64_t slot = 0;
        uint64_t view = 0;
        Digest digest;
    };

    // --- lane side ---
    void car_tick(Context& ctx);
    void handle_car(Context& ctx, const Car& car);
    void try_vote_chain(Context& ctx, ReplicaId lane);
    void handle_car_vote(Context& ctx, const CarVoteMsg& msg);
    void handle_poa(Context& ctx, const PoAMsg& msg);
    void adopt_tip(ReplicaId lane, const LaneTip& tip);
    std::vector<ReplicaId> car_targets() const;

    // --- consensus side ---
    ReplicaId leader_of(uint64_t slot, uint64_t view) const;
    SlotState& slot_state(uint64_t slot);
    void maybe_propose(Context& ctx, uint64_t slot);
    void handle_proposal(Context& ctx, ReplicaId from, const CutProposalMsg& msg);
    void handle_phase_vote(Context& ctx, const PhaseVoteMsg& msg);
    void handle_qc_relay(Context& ctx, const QcRelayMsg& msg);
    void handle_commit_cert(Context& ctx, const CommitCertMsg& msg);
    void handle_timeout_vote(Context& ctx, const TimeoutVoteMsg& msg);
    void handle_timeout_cert(Context& ctx, const TimeoutCert& cert);
    void evaluate_slot(Context& ctx, uint64_t slot);
    void on_prepare_qc(Context& ctx, uint64_t slot, uint64_t view, const Digest& digest);
    void commit_cut(Context& ctx, uint64_t slot, uint64_t view, const Digest& digest,
                    uint32_t signer_bitmap);
    void enter_view(Context& ctx, uint64_t slot, uint64_t view, std::optional<TimeoutCert> tc);
    void arm_slot_timer(Context& ctx);
    uint64_t watermark_slot() const;
    bool validate_records(Context& ctx, const TipCut& cut);
    std::optional<QuorumCert> assemble_qc(Phase phase, uint64_t slot, uint64_t view,
                                          const Digest& digest,
                                          const std::map<ReplicaId, Signature>& votes) const;

    // --- execution side ---
    void try_execute(Context& ctx);
    void execute_block(Context& ctx, uint64_t slot);
    void request_car(Context& ctx, ReplicaId lane, const Digest& digest,
                     std::vector<ReplicaId> sources);
    void handle_fetch_request(Context& ctx, ReplicaId from, const FetchRequestMsg& msg);
    void handle_fetch_response(Context& ctx, const FetchResponseMsg& msg);

    uint64_t new_timer(Context& ctx, uint64_t at_ms, TimerDesc desc);
    bool fault_window(bool enabled, uint64_t from, uint64_t to, uint64_t now) const {
        return enabled && now >= from && now < to;
    }

    ReplicaId id_;
    ReplicaConfig config_;
    const KeyRegistry* keys_;

    // lanes
    LaneOwner owner_;
    std::vector<LaneVoter> voters_;
    CarStore cars_;
    std::deque<Bytes> pending_txs_;
    std::vector<std::optional<LaneTip>> known_tips_;
    std::vector<std::map<uint64_t, Car>> stash_;  // future cars per lane
    std::map<Digest, PendingFetch> pending_fetches_;

    // consensus
    std::map<uint64_t, SlotState> slots_;
    std::map<uint64_t, TipCut> committed_;
    std::set<uint64_t> dirty_slots_;
    std::vector<JournalEntry> journal_;
    uint64_t low_watermark_ = 0;  // lowest possibly-uncommitted slot
    uint64_t armed_timer_slot_ = UINT64_MAX;
    uint64_t armed_timer_view_ = UINT64_MAX;

    // execution + state consensus
    Linearizer linearizer_;
    WorldState state_;
    StateCommitment commitment_;
    FlatStore store_;
    StateTallyBook tally_;
    std::vector<Bytes32> commitments_;  // per height, [0] = genesis
    uint64_t next_exec_slot_ = 0;
    bool exec_timer_armed_ = false;
    std::map<uint64_t, StateQuorumRecord> quorum_records_;
    uint64_t max_state_lag_ = 0;
    bool halt_traced_ = false;
    uint64_t blocks_executed_ = 0;

    std::map<uint64_t, TimerDesc> timers_;
    uint64_t next_timer_id_ = 1;
};

}  // namespace lanebft
