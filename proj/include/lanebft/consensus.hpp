// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lanebft/commitment.hpp>
#include <lanebft/lane.hpp>
#include <lanebft/tx.hpp>

namespace lanebft {

/// Quorum sizes for n = 3f+1: prepare and commit certificates need n-f =
/// 2f+1 votes; the confirm round needs 2f+1 acknowledgments.
inline constexpr uint32_t qc_quorum(uint32_t n, uint32_t f) { return n - f; }
inline constexpr uint32_t confirm_quorum(uint32_t f) { return 2 * f + 1; }

/// Stake-weighted round robin: with S the total stake, view v maps to the
/// replica whose cumulative-stake bracket contains (v mod S). Deterministic
/// everywhere, and each replica leads exactly stake/S of any S consecutive
/// views.
ReplicaId select_leader(uint64_t view, std::span<const uint64_t> stakes);

/// One lane's entry in a cut. Lanes with no certified car yet carry
/// has = false; offline lanes carry their last certified tip.
struct TipEntry {
    bool has = false;
    uint64_t pos = 0;
    Digest car;
    PoACert poa;

    bool operator==(const TipEntry&) const = default;
};

/// The consensus payload: one certified tip per lane plus any state quorum
/// records ready for embedding. The digest covers slot, tips and records;
/// view and proposer are bound by the votes, not the cut, so a view change
/// can re-propose the same cut without changing its digest.
struct TipCut {
    uint64_t slot = 0;
    std::vector<TipEntry> tips;
    std::vector<StateQuorumRecord> records;

    bool operator==(const TipCut&) const = default;
};

Bytes encode_tip_cut(const TipCut& cut);
TipCut decode_tip_cut(ByteView data);
Digest cut_digest(const TipCut& cut);

/// Pointwise per-lane position monotonicity between consecutive cuts.
bool tips_monotone(const TipCut& prev, const TipCut& next);

enum class Phase : uint8_t {
    kPrepare = 0,
    kCommit = 1,
    kConfirm = 2,
};

Digest phase_vote_digest(Phase phase, uint64_t slot, uint64_t view, const Digest& cut);
Digest timeout_vote_digest(uint64_t slot, uint64_t view);

struct QuorumCert {
    Phase phase = Phase::kPrepare;
    uint64_t slot = 0;
    uint64_t view = 0;
    Digest cut;
    std::vector<Signature> votes;

    /// >= n-f distinct verified signers over the phase vote digest.
    bool valid(const KeyRegistry& keys, uint32_t n, uint32_t f) const;
    uint32_t signer_bitmap() const;

    bool operator==(const QuorumCert&) const = default;
};

/// Justifies entering view+1 for a slot. Carries the highest PrepareQC any
/// signer reported (plus its cut) so the next leader re-proposes a possibly
/// committed cut instead of conflicting with it.
struct TimeoutCert {
    uint64_t slot = 0;
    uint64_t view = 0;
    std::vector<Signature> votes;
    std::optional<QuorumCert> high_prepare;
    std::optional<TipCut> high_prepare_cut;

    bool valid(const KeyRegistry& keys, uint32_t n, uint32_t f) const;

    bool operator==(const TimeoutCert&) const = default;
};

/// One committed cut in the journal, enough to audit quorums offline.
struct JournalEntry {
    uint64_t slot = 0;
    uint64_t view = 0;
    Digest cut;
    std::vector<std::pair<bool, uint64_t>> lane_tips;  // (has, pos) per lane
    uint32_t commit_signer_bitmap = 0;

    bool operator==(const JournalEntry&) const = default;
};

/// Deterministic expansion of committed cuts into blocks: lanes in
/// ascending id, cars in ascending pos above the previous committed tip,
/// transactions in batch order, duplicate digests skipped globally
/// (first occurrence wins). Undecodable transaction bytes from Byzantine
/// lanes are skipped and counted.
struct Block {
    uint64_t height = 0;
    uint64_t slot = 0;
    std::vector<Transaction> txs;
    uint32_t cars = 0;
    uint32_t duplicates_skipped = 0;
    uint32_t malformed_skipped = 0;
};

class Linearizer {
public:
    explicit Linearizer(uint32_t lanes) : committed_pos_(lanes, -1) {}

    /// First unavailable car digest per lane, walking parent references
    /// down from each tip. Fetching is iterative: a missing parent is only
    /// discoverable once its child arrives.
    std::vector<std::pair<ReplicaId, Digest>> missing_cars(const TipCut& cut,
                                                           const CarStore& cars) const;

    /// Requires missing_cars(cut, cars) to be empty.
    Block expand(const TipCut& cut, const CarStore& cars, uint64_t height);

    const std::vector<int64_t>& committed_pos() const { return committed_pos_; }
    bool seen(const Digest& tx) const { return seen_txs_.contains(tx); }

private:
    std::vector<int64_t> committed_pos_;
    std::set<Digest> seen_txs_;
};

}  // namespace lanebft
