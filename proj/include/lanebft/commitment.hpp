// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lanebft/state.hpp>

namespace lanebft {

/// Order-independent commitment to the full flat state: the wrapping
/// 256-bit sum of entry digests. Insertion and removal are O(1) per entry,
/// so it can be maintained incrementally while stays recomputable from
/// scratch for audit.
struct StateCommitment {
    Bytes32 value{};
    uint64_t height = 0;

    auto operator<=>(const StateCommitment&) const = default;
};

Digest entry_digest(const Location& loc, const Bytes32& value);

StateCommitment commit_of_state(const WorldState& state);

/// c - digest(old) + digest(new), each side optional. The caller is
/// responsible for old_entry matching what was actually present; tests
/// audit this against full recomputes.
StateCommitment update_commitment(const StateCommitment& c,
                                  const std::optional<std::pair<Location, Bytes32>>& old_entry,
                                  const std::optional<std::pair<Location, Bytes32>>& new_entry);

struct StateAttestation {
    uint64_t height = 0;
    Bytes32 commitment{};
    ReplicaId signer = 0;
    Signature sig;

    bool operator==(const StateAttestation&) const = default;
};

Digest attestation_digest(uint64_t height, const Bytes32& commitment);
StateAttestation make_attestation(const KeyRegistry& keys, ReplicaId signer, uint64_t height,
                                  const Bytes32& commitment);
bool verify_attestation(const KeyRegistry& keys, const StateAttestation& a);

/// One height's quorum-committed state root, as embedded in a later cut.
/// Wire format: height(8 BE) | commitment(32) | signer bitmap(4 BE) |
/// signatures (one 36-byte signer+tag per set bit, ascending signer).
struct StateQuorumRecord {
    uint64_t height = 0;
    Bytes32 commitment{};
    std::vector<Signature> sigs;
    uint64_t committed_at = 0;  // block height of the embedding cut

    uint64_t lag() const { return committed_at - height; }

    bool operator==(const StateQuorumRecord&) const = default;
};

enum class TallyState : uint8_t { kPending, kCommitted, kHalted };

struct TallyResult {
    TallyState state = TallyState::kPending;
    Bytes32 value{};                 // committed commitment (kCommitted only)
    uint64_t attesting_stake = 0;    // stake behind `value`
    uint64_t diverging_stake = 0;    // stake attesting non-majority values
    uint64_t total_stake = 0;
    std::vector<Signature> sigs;     // attestation signatures backing `value`

    /// Diverging stake fraction as an exact rational over total stake.
    double phi() const { return total_stake ? double(diverging_stake) / double(total_stake) : 0.0; }
};

/// Stake-weighted state consensus for one height. Committed once one value
/// gathers >= 2/3 of total stake; halted once diverging stake exceeds 1/3.
/// Duplicate attestations from one validator keep the first and are flagged.
TallyResult tally(const std::vector<StateAttestation>& attestations,
                  const std::vector<uint64_t>& stakes, uint64_t total_stake);

/// Running tally over all heights; the replica feeds it attestations in
/// linearized order so every replica reaches identical conclusions.
class StateTallyBook {
public:
    StateTallyBook(std::vector<uint64_t> stakes);

    /// Returns false for a duplicate (validator, height) attestation.
    bool add(const StateAttestation& a);

    TallyResult status(uint64_t height) const;

    /// Heights whose tally is committed but which have not been marked
    /// embedded yet, in ascending order.
    std::vector<uint64_t> ready_heights() const;
    void mark_embedded(uint64_t height);

    bool halted() const { return halted_; }
    uint64_t halted_height() const { return halted_height_; }
    uint64_t duplicate_count() const { return duplicates_; }

private:
    std::vector<uint64_t> stakes_;
    uint64_t total_stake_ = 0;
    std::map<uint64_t, std::vector<StateAttestation>> by_height_;
    std::set<uint64_t> embedded_;
    bool halted_ = false;
    uint64_t halted_height_ = 0;
    uint64_t duplicates_ = 0;
};

// --- Batch-built membership index -----------------------------------------
//
// A sorted snapshot of the flat state at one height, Merkle-hashed so that
// batched membership and non-membership proofs verify against a root that
// is anchored to the additive commitment. Building it is a batch job off
// the execution path.

struct IndexRoot {
    uint64_t height = 0;
    Bytes32 commitment{};
    Digest merkle_root;
    uint64_t leaf_count = 0;

    /// Binds the proof index to the consensus commitment value.
    Digest anchor() const;

    bool operator==(const IndexRoot&) const = default;
};

struct SnapshotIndex {
    IndexRoot root;
    std::vector<std::pair<Location, Bytes32>> entries;  // sorted by Location
    std::vector<std::vector<Digest>> levels;            // levels[0] = leaf hashes
};

SnapshotIndex build_snapshot_index(const WorldState& state, const StateCommitment& commitment);

struct MerklePath {
    uint64_t leaf_index = 0;
    std::vector<Digest> siblings;  // bottom-up
};

struct ProvenEntry {
    Location loc;
    Bytes32 value;
    MerklePath path;
};

/// Proof for one queried key: either the entry itself, or the adjacent
/// entries bracketing the gap where the key would live. At the edges only
/// one neighbour exists.
struct KeyProof {
    Location key;
    bool present = false;
    std::optional<ProvenEntry> entry;        // present
    std::optional<ProvenEntry> predecessor;  // absent, if any key sorts below
    std::optional<ProvenEntry> successor;    // absent, if any key sorts above
};

struct BatchProof {
    uint64_t height = 0;
    std::vector<KeyProof> keys;
};

BatchProof prove_membership(const SnapshotIndex& index, const std::vector<Location>& keys);

/// Checks every per-key proof against the root: paths, adjacency of the
/// bracketing leaves, and key ordering. Rejects proofs built against a
/// different height's root.
bool verify_membership(const IndexRoot& root, const BatchProof& proof);

}  // namespace lanebft
