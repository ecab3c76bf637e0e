// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/consensus.hpp>

#include <stdexcept>

namespace lanebft {

ReplicaId select_leader(uint64_t view, std::span<const uint64_t> stakes) {
    uint64_t total = 0;
    for (auto s : stakes)
        total += s;
    if (total == 0)
        throw std::invalid_argument("select_leader: total stake is zero");
    uint64_t point = view % total;
    uint64_t cumulative = 0;
    for (ReplicaId r = 0; r < stakes.size(); ++r) {
        cumulative += stakes[r];
        if (point < cumulative)
            return r;
    }
    return static_cast<ReplicaId>(stakes.size() - 1);  // unreachable
}

namespace {

void put_signatures(ByteWriter& w, const std::vector<Signature>& sigs) {
    w.u16(static_cast<uint16_t>(sigs.size()));
    for (const auto& sig : sigs) {
        w.u32(sig.signer);
        w.raw(sig.tag);
    }
}

std::vector<Signature> read_signatures(ByteReader& r) {
    uint16_t count = r.u16();
    std::vector<Signature> sigs;
    sigs.reserve(std::min<size_t>(count, r.remaining() / 36 + 1));
    for (uint16_t i = 0; i < count; ++i) {
        Signature sig;
        sig.signer = r.u32();
        sig.tag = r.array<32>();
        sigs.push_back(sig);
    }
    return sigs;
}

void put_poa(ByteWriter& w, const PoACert& poa) {
    w.raw(poa.car_digest.bytes);
    put_signatures(w, poa.votes);
}

PoACert read_poa(ByteReader& r) {
    PoACert poa;
    poa.car_digest.bytes = r.array<32>();
    poa.votes = read_signatures(r);
    return poa;
}

// StateQuorumRecord inside a cut: height(8) | commitment(32) |
// signer bitmap(4) | tag(32) per set bit, ascending signer. committed_at is
// the embedding cut's block height and is reattached at decode.
void put_record(ByteWriter& w, const StateQuorumRecord& record) {
    w.u64(record.height);
    w.raw(record.commitment.bytes);
    uint32_t bitmap = 0;
    for (const auto& sig : record.sigs)
        bitmap |= 1u << sig.signer;
    w.u32(bitmap);
    for (const auto& sig : record.sigs)
        w.raw(sig.tag);
}

StateQuorumRecord read_record(ByteReader& r, uint64_t committed_at) {
    StateQuorumRecord record;
    record.height = r.u64();
    record.commitment.bytes = r.array<32>();
    uint32_t bitmap = r.u32();
    for (uint32_t signer = 0; signer < 32; ++signer) {
        if (bitmap & (1u << signer)) {
            Signature sig;
            sig.signer = signer;
            sig.tag = r.array<32>();
            record.sigs.push_back(sig);
        }
    }
    record.committed_at = committed_at;
    return record;
}

}  // namespace

Bytes encode_tip_cut(const TipCut& cut) {
    ByteWriter w;
    w.u64(cut.slot);
    w.u32(static_cast<uint32_t>(cut.tips.size()));
    for (const auto& tip : cut.tips) {
        w.u8(tip.has ? 1 : 0);
        if (tip.has) {
            w.u64(tip.pos);
            w.raw(tip.car.bytes);
            put_poa(w, tip.poa);
        }
    }
    w.u16(static_cast<uint16_t>(cut.records.size()));
    for (const auto& record : cut.records)
        put_record(w, record);
    return w.take();
}

TipCut decode_tip_cut(ByteView data) {
    ByteReader r(data);
    TipCut cut;
    cut.slot = r.u64();
    uint32_t lanes = r.u32();
    cut.tips.reserve(std::min<size_t>(lanes, 1024));
    for (uint32_t i = 0; i < lanes; ++i) {
        TipEntry tip;
        tip.has = r.u8() != 0;
        if (tip.has) {
            tip.pos = r.u64();
            tip.car.bytes = r.array<32>();
            tip.poa = read_poa(r);
        }
        cut.tips.push_back(std::move(tip));
    }
    uint16_t records = r.u16();
    for (uint16_t i = 0; i < records; ++i)
        cut.records.push_back(read_record(r, cut.slot + 1));
    if (!r.eof())
        throw DecodeError("trailing bytes after cut", r.pos());
    return cut;
}

Digest cut_digest(const TipCut& cut) {
    return sha256(encode_tip_cut(cut));
}

bool tips_monotone(const TipCut& prev, const TipCut& next) {
    if (prev.tips.size() != next.tips.size())
        return false;
    for (size_t lane = 0; lane < prev.tips.size(); ++lane) {
        if (!prev.tips[lane].has)
            continue;
        if (!next.tips[lane].has)
            return false;
        if (next.tips[lane].pos < prev.tips[lane].pos)
            return false;
    }
    return true;
}

Digest phase_vote_digest(Phase phase, uint64_t slot, uint64_t view, const Digest& cut) {
    Hasher h;
    h.update(ByteView(reinterpret_cast<const uint8_t*>("phase"), 5));
    uint8_t p = static_cast<uint8_t>(phase);
    h.update(ByteView(&p, 1));
    h.update_u64(slot);
    h.update_u64(view);
    h.update(ByteView(cut.bytes.data(), 32));
    return h.finish();
}

Digest timeout_vote_digest(uint64_t slot, uint64_t view) {
    Hasher h;
    h.update(ByteView(reinterpret_cast<const uint8_t*>("timeout"), 7));
    h.update_u64(slot);
    h.update_u64(view);
    return h.finish();
}

bool QuorumCert::valid(const KeyRegistry& keys, uint32_t n, uint32_t f) const {
    Digest msg = phase_vote_digest(phase, slot, view, cut);
    std::set<ReplicaId> signers;
    for (const auto& vote : votes) {
        if (vote.signer >= n || !keys.verify(vote, msg))
            return false;
        signers.insert(vote.signer);
    }
    return signers.size() >= qc_quorum(n, f);
}

uint32_t QuorumCert::signer_bitmap() const {
    uint32_t bitmap = 0;
    for (const auto& vote : votes)
        bitmap |= 1u << vote.signer;
    return bitmap;
}

bool TimeoutCert::valid(const KeyRegistry& keys, uint32_t n, uint32_t f) const {
    Digest msg = timeout_vote_digest(slot, view);
    std::set<ReplicaId> signers;
    for (const auto& vote : votes) {
        if (vote.signer >= n || !keys.verify(vote, msg))
            return false;
        signers.insert(vote.signer);
    }
    if (signers.size() < qc_quorum(n, f))
        return false;
    if (high_prepare.has_value() != high_prepare_cut.has_value())
        return false;
    if (high_prepare) {
        if (high_prepare->phase != Phase::kPrepare || high_prepare->slot != slot ||
            high_prepare->view > view)
            return false;
        if (cut_digest(*high_prepare_cut) != high_prepare->cut)
            return false;
        if (!high_prepare->valid(keys, n, f))
            return false;
    }
    return true;
}

std::vector<std::pair<ReplicaId, Digest>> Linearizer::missing_cars(const TipCut& cut,
                                                                   const CarStore& cars) const {
    std::vector<std::pair<ReplicaId, Digest>> missing;
    for (ReplicaId lane = 0; lane < cut.tips.size(); ++lane) {
        const TipEntry& tip = cut.tips[lane];
        if (!tip.has)
            continue;
        int64_t limit = committed_pos_[lane];
        if (static_cast<int64_t>(tip.pos) <= limit)
            continue;
        Digest digest = tip.car;
        while (true) {
            const Car* car = cars.get(digest);
            if (car == nullptr) {
                missing.emplace_back(lane, digest);
                break;
            }
            if (car->pos == 0 || static_cast<int64_t>(car->pos) - 1 <= limit)
                break;
            digest = car->parent_ref;
        }
    }
    return missing;
}

Block Linearizer::expand(const TipCut& cut, const CarStore& cars, uint64_t height) {
    Block block;
    block.height = height;
    block.slot = cut.slot;
    for (ReplicaId lane = 0; lane < cut.tips.size(); ++lane) {
        const TipEntry& tip = cut.tips[lane];
        if (!tip.has)
            continue;
        int64_t limit = committed_pos_[lane];
        if (static_cast<int64_t>(tip.pos) <= limit)
            continue;

        std::vector<const Car*> chain;
        Digest digest = tip.car;
        while (true) {
            const Car* car = cars.get(digest);
            if (car == nullptr)
                throw std::logic_error("expand: missing car (fetch first)");
            chain.push_back(car);
            if (car->pos == 0 || static_cast<int64_t>(car->pos) - 1 <= limit)
                break;
            digest = car->parent_ref;
        }
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
            ++block.cars;
            for (const Bytes& raw : (*it)->batch) {
                Transaction tx;
                try {
                    tx = decode_transaction(ByteView(raw.data(), raw.size()));
                } catch (const DecodeError&) {
                    ++block.malformed_skipped;
                    continue;
                }
                Digest d = tx_digest(tx);
                if (seen_txs_.contains(d)) {
                    ++block.duplicates_skipped;
                    continue;
                }
                seen_txs_.insert(d);
                block.txs.push_back(std::move(tx));
            }
        }
        committed_pos_[lane] = static_cast<int64_t>(tip.pos);
    }
    return block;
}

}  // namespace lanebft
