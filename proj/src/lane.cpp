// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/lane.hpp>

namespace lanebft {

Bytes encode_car(const Car& car) {
    ByteWriter w;
    w.u32(car.lane);
    w.u64(car.pos);
    w.raw(car.parent_ref.bytes);
    w.u32(static_cast<uint32_t>(car.batch.size()));
    for (const auto& tx : car.batch) {
        w.u32(static_cast<uint32_t>(tx.size()));
        w.raw(tx);
    }
    return w.take();
}

Car decode_car(ByteView data) {
    ByteReader r(data);
    Car car;
    car.lane = r.u32();
    car.pos = r.u64();
    car.parent_ref.bytes = r.array<32>();
    uint32_t count = r.u32();
    car.batch.reserve(std::min<size_t>(count, r.remaining() / 4 + 1));
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t len = r.u32();
        ByteView tx = r.bytes(len);
        car.batch.emplace_back(tx.begin(), tx.end());
    }
    if (!r.eof())
        throw DecodeError("trailing bytes after car", r.pos());
    return car;
}

Digest car_digest(const Car& car) {
    return sha256(encode_car(car));
}

bool PoACert::valid(const KeyRegistry& keys, uint32_t f) const {
    std::set<ReplicaId> signers;
    for (const auto& vote : votes) {
        if (!keys.verify(vote, car_digest))
            return false;
        signers.insert(vote.signer);
    }
    return signers.size() >= poa_quorum(f);
}

void CarStore::put(const Car& car) {
    cars_.emplace(car_digest(car), car);
}

const Car* CarStore::get(const Digest& digest) const {
    auto it = cars_.find(digest);
    return it == cars_.end() ? nullptr : &it->second;
}

Car LaneOwner::propose(std::vector<Bytes> batch) {
    Car car;
    car.lane = lane_;
    car.pos = next_pos_++;
    car.parent_ref = prev_digest_;
    car.batch = std::move(batch);

    Digest digest = car_digest(car);
    prev_digest_ = digest;
    auto& pending = pending_[car.pos];
    pending.digest = digest;
    pending.votes.emplace(lane_, keys_->sign(lane_, digest));
    return car;
}

std::optional<PoACert> LaneOwner::add_vote(uint64_t pos, const Digest& digest,
                                           const Signature& vote) {
    auto it = pending_.find(pos);
    if (it == pending_.end() || it->second.digest != digest || it->second.certified)
        return std::nullopt;
    if (!keys_->verify(vote, digest))
        return std::nullopt;
    auto& pending = it->second;
    pending.votes.emplace(vote.signer, vote);
    if (pending.votes.size() < poa_quorum(f_))
        return std::nullopt;

    pending.certified = true;
    PoACert cert;
    cert.car_digest = digest;
    for (const auto& [signer, sig] : pending.votes)
        cert.votes.push_back(sig);
    if (!certified_tip_ || pos > certified_tip_->pos)
        certified_tip_ = LaneTip{pos, digest, cert};
    return cert;
}

VoteOutcome LaneVoter::consider(const Car& car, const Digest& digest) const {
    auto prior = voted_.find(car.pos);
    if (prior != voted_.end())
        return prior->second == digest ? VoteOutcome::kDuplicate : VoteOutcome::kEquivocation;
    if (car.pos != static_cast<uint64_t>(last_voted_pos_ + 1))
        return car.pos > static_cast<uint64_t>(last_voted_pos_ + 1) ? VoteOutcome::kGap
                                                                    : VoteOutcome::kEquivocation;
    if (car.parent_ref != last_voted_digest_)
        return VoteOutcome::kParentMismatch;
    return VoteOutcome::kVote;
}

void LaneVoter::record_vote(uint64_t pos, const Digest& digest) {
    voted_[pos] = digest;
    last_voted_pos_ = static_cast<int64_t>(pos);
    last_voted_digest_ = digest;
}

}  // namespace lanebft
