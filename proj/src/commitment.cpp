// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/commitment.hpp>

#include <algorithm>

namespace lanebft {

Digest entry_digest(const Location& loc, const Bytes32& value) {
    Bytes key = loc.encode();
    return sha256({ByteView(key.data(), key.size()), ByteView(value.bytes.data(), 32)});
}

namespace {

u256 as_sum(const Bytes32& v) {
    return value_as_u256(v);
}

Bytes32 from_sum(const u256& v) {
    return u256_to_be32(v);
}

u256 digest_term(const Location& loc, const Bytes32& value) {
    Digest d = entry_digest(loc, value);
    return u256_from_be(ByteView(d.bytes.data(), 32));
}

}  // namespace

StateCommitment commit_of_state(const WorldState& state) {
    u256 sum = 0;
    for (const auto& [loc, value] : state.entries)
        sum += digest_term(loc, value);
    return StateCommitment{from_sum(sum), state.height};
}

StateCommitment update_commitment(const StateCommitment& c,
                                  const std::optional<std::pair<Location, Bytes32>>& old_entry,
                                  const std::optional<std::pair<Location, Bytes32>>& new_entry) {
    u256 sum = as_sum(c.value);
    if (old_entry)
        sum -= digest_term(old_entry->first, old_entry->second);
    if (new_entry)
        sum += digest_term(new_entry->first, new_entry->second);
    return StateCommitment{from_sum(sum), c.height};
}

Digest attestation_digest(uint64_t height, const Bytes32& commitment) {
    Hasher h;
    h.update(ByteView(reinterpret_cast<const uint8_t*>("attest"), 6));
    h.update_u64(height);
    h.update(ByteView(commitment.bytes.data(), 32));
    return h.finish();
}

StateAttestation make_attestation(const KeyRegistry& keys, ReplicaId signer, uint64_t height,
                                  const Bytes32& commitment) {
    StateAttestation a;
    a.height = height;
    a.commitment = commitment;
    a.signer = signer;
    a.sig = keys.sign(signer, attestation_digest(height, commitment));
    return a;
}

bool verify_attestation(const KeyRegistry& keys, const StateAttestation& a) {
    return a.sig.signer == a.signer && keys.verify(a.sig, attestation_digest(a.height, a.commitment));
}

TallyResult tally(const std::vector<StateAttestation>& attestations,
                  const std::vector<uint64_t>& stakes, uint64_t total_stake) {
    TallyResult result;
    result.total_stake = total_stake;

    std::map<Bytes32, std::pair<uint64_t, std::vector<Signature>>> by_value;
    for (const auto& a : attestations) {
        if (a.signer >= stakes.size())
            continue;
        auto& bucket = by_value[a.commitment];
        bucket.first += stakes[a.signer];
        bucket.second.push_back(a.sig);
    }

    // Leading value: most stake, ties broken by value bytes so every
    // replica picks the same one.
    uint64_t best_stake = 0;
    const Bytes32* best_value = nullptr;
    for (const auto& [value, bucket] : by_value) {
        if (bucket.first > best_stake) {
            best_stake = bucket.first;
            best_value = &value;
        }
    }
    uint64_t attested = 0;
    for (const auto& [value, bucket] : by_value)
        attested += bucket.first;
    uint64_t diverging = attested - best_stake;

    result.attesting_stake = best_stake;
    result.diverging_stake = diverging;

    if (diverging * 3 > total_stake) {
        result.state = TallyState::kHalted;
        return result;
    }
    if (best_value != nullptr && best_stake * 3 >= total_stake * 2) {
        result.state = TallyState::kCommitted;
        result.value = *best_value;
        result.sigs = by_value[*best_value].second;
        std::sort(result.sigs.begin(), result.sigs.end(),
                  [](const Signature& a, const Signature& b) { return a.signer < b.signer; });
        return result;
    }
    result.state = TallyState::kPending;
    return result;
}

StateTallyBook::StateTallyBook(std::vector<uint64_t> stakes) : stakes_(std::move(stakes)) {
    for (auto s : stakes_)
        total_stake_ += s;
}

bool StateTallyBook::add(const StateAttestation& a) {
    auto& list = by_height_[a.height];
    for (const auto& seen : list) {
        if (seen.signer == a.signer) {
            ++duplicates_;
            return false;
        }
    }
    list.push_back(a);
    TallyResult r = tally(list, stakes_, total_stake_);
    if (r.state == TallyState::kHalted && !halted_) {
        halted_ = true;
        halted_height_ = a.height;
    }
    return true;
}

TallyResult StateTallyBook::status(uint64_t height) const {
    auto it = by_height_.find(height);
    if (it == by_height_.end()) {
        TallyResult r;
        r.total_stake = total_stake_;
        return r;
    }
    return tally(it->second, stakes_, total_stake_);
}

std::vector<uint64_t> StateTallyBook::ready_heights() const {
    std::vector<uint64_t> out;
    for (const auto& [height, list] : by_height_) {
        if (embedded_.contains(height))
            continue;
        if (tally(list, stakes_, total_stake_).state == TallyState::kCommitted)
            out.push_back(height);
    }
    return out;
}

void StateTallyBook::mark_embedded(uint64_t height) {
    embedded_.insert(height);
}

// --- snapshot index --------------------------------------------------------

namespace {

Digest leaf_hash(const Location& loc, const Bytes32& value) {
    Digest e = entry_digest(loc, value);
    uint8_t tag = 0x00;
    return sha256({ByteView(&tag, 1), ByteView(e.bytes.data(), 32)});
}

Digest node_hash(const Digest& left, const Digest& right) {
    uint8_t tag = 0x01;
    return sha256({ByteView(&tag, 1), ByteView(left.bytes.data(), 32), ByteView(right.bytes.data(), 32)});
}

Digest empty_pad() {
    uint8_t tag = 0x02;
    return sha256(ByteView(&tag, 1));
}

Digest root_of(const std::vector<std::vector<Digest>>& levels, uint64_t leaf_count) {
    Hasher h;
    h.update_u64(leaf_count);
    Digest top = levels.empty() ? empty_pad() : levels.back()[0];
    h.update(ByteView(top.bytes.data(), 32));
    return h.finish();
}

}  // namespace

SnapshotIndex build_snapshot_index(const WorldState& state, const StateCommitment& commitment) {
    SnapshotIndex index;
    index.root.height = commitment.height;
    index.root.commitment = commitment.value;
    index.entries.assign(state.entries.begin(), state.entries.end());
    index.root.leaf_count = index.entries.size();

    if (!index.entries.empty()) {
        std::vector<Digest> level;
        level.reserve(index.entries.size());
        for (const auto& [loc, value] : index.entries)
            level.push_back(leaf_hash(loc, value));
        index.levels.push_back(level);
        while (index.levels.back().size() > 1) {
            const auto& below = index.levels.back();
            std::vector<Digest> above;
            above.reserve((below.size() + 1) / 2);
            for (size_t i = 0; i < below.size(); i += 2) {
                Digest right = (i + 1 < below.size()) ? below[i + 1] : empty_pad();
                above.push_back(node_hash(below[i], right));
            }
            index.levels.push_back(std::move(above));
        }
    }
    index.root.merkle_root = root_of(index.levels, index.root.leaf_count);
    return index;
}

Digest IndexRoot::anchor() const {
    Hasher h;
    h.update_u64(height);
    h.update(ByteView(commitment.bytes.data(), 32));
    h.update(ByteView(merkle_root.bytes.data(), 32));
    return h.finish();
}

namespace {

MerklePath path_for(const SnapshotIndex& index, uint64_t leaf) {
    MerklePath path;
    path.leaf_index = leaf;
    uint64_t pos = leaf;
    for (size_t level = 0; level + 1 < index.levels.size(); ++level) {
        uint64_t sibling = pos ^ 1;
        const auto& nodes = index.levels[level];
        path.siblings.push_back(sibling < nodes.size() ? nodes[sibling] : empty_pad());
        pos >>= 1;
    }
    return path;
}

ProvenEntry proven(const SnapshotIndex& index, uint64_t leaf) {
    return ProvenEntry{index.entries[leaf].first, index.entries[leaf].second, path_for(index, leaf)};
}

bool path_ok(const IndexRoot& root, const ProvenEntry& e) {
    if (e.path.leaf_index >= root.leaf_count)
        return false;
    Digest node = leaf_hash(e.loc, e.value);
    uint64_t pos = e.path.leaf_index;
    for (const auto& sibling : e.path.siblings) {
        node = (pos & 1) ? node_hash(sibling, node) : node_hash(node, sibling);
        pos >>= 1;
    }
    if (pos != 0)
        return false;
    Hasher h;
    h.update_u64(root.leaf_count);
    h.update(ByteView(node.bytes.data(), 32));
    return h.finish() == root.merkle_root;
}

}  // namespace

BatchProof prove_membership(const SnapshotIndex& index, const std::vector<Location>& keys) {
    BatchProof proof;
    proof.height = index.root.height;
    for (const auto& key : keys) {
        KeyProof kp;
        kp.key = key;
        auto it = std::lower_bound(index.entries.begin(), index.entries.end(), key,
                                   [](const auto& entry, const Location& k) { return entry.first < k; });
        uint64_t i = static_cast<uint64_t>(it - index.entries.begin());
        if (it != index.entries.end() && it->first == key) {
            kp.present = true;
            kp.entry = proven(index, i);
        } else {
            if (i > 0)
                kp.predecessor = proven(index, i - 1);
            if (i < index.entries.size())
                kp.successor = proven(index, i);
        }
        proof.keys.push_back(std::move(kp));
    }
    return proof;
}

bool verify_membership(const IndexRoot& root, const BatchProof& proof) {
    if (proof.height != root.height)
        return false;
    for (const auto& kp : proof.keys) {
        if (kp.present) {
            if (!kp.entry || kp.entry->loc != kp.key || !path_ok(root, *kp.entry))
                return false;
            continue;
        }
        // Absence: the bracketing leaves must be adjacent, ordered around
        // the key, and at the index edges when a side is missing.
        if (kp.predecessor) {
            if (!(kp.predecessor->loc < kp.key) || !path_ok(root, *kp.predecessor))
                return false;
        }
        if (kp.successor) {
            if (!(kp.key < kp.successor->loc) || !path_ok(root, *kp.successor))
                return false;
        }
        if (kp.predecessor && kp.successor) {
            if (kp.successor->path.leaf_index != kp.predecessor->path.leaf_index + 1)
                return false;
        } else if (kp.predecessor) {
            if (kp.predecessor->path.leaf_index + 1 != root.leaf_count)
                return false;
        } else if (kp.successor) {
            if (kp.successor->path.leaf_index != 0)
                return false;
        } else {
            if (root.leaf_count != 0)
                return false;
        }
    }
    return true;
}

}  // namespace lanebft
