// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lanebft/crypto.hpp>

#include <map>
#include <optional>

namespace lanebft {

/// Votes needed for a proof of availability: f+1 guarantees at least one
/// correct replica stores the batch.
inline constexpr uint32_t poa_quorum(uint32_t f) { return f + 1; }

/// One data proposal in a lane: a transaction batch chained to the previous
/// proposal by digest.
///
/// Wire format: lane(4 BE) | pos(8 BE) | parent_ref(32) | tx_count(4 BE) |
/// per tx: len(4 BE) | encoded tx bytes.
struct Car {
    ReplicaId lane = 0;
    uint64_t pos = 0;
    Digest parent_ref;  // zero digest at pos 0
    std::vector<Bytes> batch;

    bool operator==(const Car&) const = default;
};

Bytes encode_car(const Car& car);
Car decode_car(ByteView data);
Digest car_digest(const Car& car);

struct PoACert {
    Digest car_digest;
    std::vector<Signature> votes;

    /// >= f+1 verified votes from distinct signers over car_digest.
    bool valid(const KeyRegistry& keys, uint32_t f) const;

    bool operator==(const PoACert&) const = default;
};

/// A lane's most recent certified proposal. Referencing it implicitly
/// certifies the whole prefix of the lane.
struct LaneTip {
    uint64_t pos = 0;
    Digest digest;
    PoACert poa;

    bool operator==(const LaneTip&) const = default;
};

/// Cars indexed by digest. Batches land here before a replica votes, which
/// is what makes the PoA availability argument hold.
class CarStore {
public:
    void put(const Car& car);
    const Car* get(const Digest& digest) const;
    bool contains(const Digest& digest) const { return cars_.contains(digest); }
    size_t size() const { return cars_.size(); }

private:
    std::map<Digest, Car> cars_;
};

/// Production side of one replica's own lane: sequential chaining plus vote
/// collection until each car reaches its PoA.
class LaneOwner {
public:
    LaneOwner(ReplicaId lane, const KeyRegistry* keys, uint32_t f)
        : lane_(lane), keys_(keys), f_(f) {}

    /// Chains a new car onto the lane and records the owner's own vote.
    Car propose(std::vector<Bytes> batch);

    /// Returns the PoA the first time a car's distinct verified votes reach
    /// f+1. Duplicate signers count once; bad signatures are dropped.
    std::optional<PoACert> add_vote(uint64_t pos, const Digest& digest, const Signature& vote);

    uint64_t next_pos() const { return next_pos_; }
    const std::optional<LaneTip>& certified_tip() const { return certified_tip_; }

private:
    struct PendingCar {
        Digest digest;
        std::map<ReplicaId, Signature> votes;
        bool certified = false;
    };

    ReplicaId lane_;
    const KeyRegistry* keys_;
    uint32_t f_;
    uint64_t next_pos_ = 0;
    Digest prev_digest_;  // zero for the first car
    std::map<uint64_t, PendingCar> pending_;
    std::optional<LaneTip> certified_tip_;
};

enum class VoteOutcome : uint8_t {
    kVote,
    kDuplicate,       // same (pos, digest) seen again
    kEquivocation,    // different digest at an already-voted pos
    kGap,             // pos skips ahead; triggers a sync request
    kParentMismatch,  // parent_ref does not extend the voted chain
};

/// Voting side for one foreign lane: enforces the chain rule (next pos,
/// matching parent) and at-most-one vote per (lane, pos).
class LaneVoter {
public:
    VoteOutcome consider(const Car& car, const Digest& digest) const;

    /// Records a cast vote; only call after consider() returned kVote.
    void record_vote(uint64_t pos, const Digest& digest);

    int64_t last_voted_pos() const { return last_voted_pos_; }
    const Digest& last_voted_digest() const { return last_voted_digest_; }

private:
    int64_t last_voted_pos_ = -1;
    Digest last_voted_digest_;  // zero before any vote
    std::map<uint64_t, Digest> voted_;
};

}  // namespace lanebft
