// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/replica.hpp>

#include <algorithm>
#include <sstream>

namespace lanebft {

namespace {

Digest bytes32_digest(const Bytes32& b) {
    Digest d;
    d.bytes = b.bytes;
    return d;
}

}  // namespace

Replica::Replica(ReplicaId id, ReplicaConfig config, const KeyRegistry* keys,
                 const std::vector<std::pair<Address, u256>>& genesis)
    : id_(id),
      config_(std::move(config)),
      keys_(keys),
      owner_(id, keys, config_.f),
      voters_(config_.n),
      known_tips_(config_.n),
      stash_(config_.n),
      linearizer_(config_.n),
      store_(std::make_unique<MemoryWalSink>()),
      tally_(config_.stakes) {
    for (const auto& [addr, balance] : genesis)
        state_.set(Location::balance(addr), balance_value(balance));
    commitment_ = commit_of_state(state_);
    commitments_.push_back(commitment_.value);
    // voters_[id_] mirrors the owner's own chain so the voting invariants
    // hold uniformly across lanes.
}

void Replica::init(Context& ctx) {
    new_timer(ctx, ctx.now_ms() + config_.car_interval_ms, {TimerDesc::Kind::kCarTick, 0, 0, {}});
    arm_slot_timer(ctx);
    maybe_propose(ctx, 0);
}

uint64_t Replica::new_timer(Context& ctx, uint64_t at_ms, TimerDesc desc) {
    uint64_t id = next_timer_id_++;
    timers_[id] = desc;
    ctx.set_timer(at_ms, id);
    return id;
}

ReplicaId Replica::leader_of(uint64_t slot, uint64_t view) const {
    return select_leader(slot + view, config_.stakes);
}

Replica::SlotState& Replica::slot_state(uint64_t slot) {
    return slots_[slot];
}

uint64_t Replica::watermark_slot() const {
    uint64_t wm = low_watermark_;
    while (committed_.contains(wm))
        ++wm;
    return wm;
}

// --- lane production and voting ---------------------------------------------

std::vector<ReplicaId> Replica::car_targets() const {
    std::vector<ReplicaId> targets;
    for (ReplicaId r = 0; r < config_.n; ++r)
        if (r != id_)
            targets.push_back(r);
    return targets;
}

void Replica::car_tick(Context& ctx) {
    uint64_t now = ctx.now_ms();
    new_timer(ctx, now + config_.car_interval_ms, {TimerDesc::Kind::kCarTick, 0, 0, {}});

    if (pending_txs_.empty() && !config_.heartbeat_cars)
        return;

    std::vector<Bytes> batch;
    while (!pending_txs_.empty() && batch.size() < config_.batch_cap) {
        batch.push_back(std::move(pending_txs_.front()));
        pending_txs_.pop_front();
    }
    bool heartbeat = batch.empty();

    Car car = owner_.propose(batch);
    Digest digest = car_digest(car);
    cars_.put(car);
    voters_[id_].record_vote(car.pos, digest);
    ctx.trace(TraceKind::kCarProposed, car.pos, batch.size(), heartbeat ? 1 : 0, 0, digest);

    std::vector<ReplicaId> targets = car_targets();
    if (fault_window(config_.faults.withhold_batch, config_.faults.withhold_from_ms,
                     config_.faults.withhold_to_ms, now)) {
        // Disseminate to just enough replicas for a PoA (owner + f votes)
        // and ignore fetches later.
        std::vector<ReplicaId> few;
        for (ReplicaId r = 0; r < config_.n && few.size() < config_.f; ++r)
            if (r != id_)
                few.push_back(r);
        targets = few;
    }

    if (fault_window(config_.faults.equivocate_lane, config_.faults.equivocate_from_ms,
                     config_.faults.equivocate_to_ms, now)) {
        // A conflicting car at the same pos. Half the voters see both, so
        // equivocation is observable; the owner keeps chaining on the first.
        Car twin = car;
        twin.batch.push_back(Bytes{0xff});  // undecodable junk makes it distinct
        cars_.put(twin);
        Bytes twin_payload = encode_message(CarMsg{twin});
        Bytes payload = encode_message(CarMsg{car});
        for (size_t i = 0; i < targets.size(); ++i) {
            ctx.send(targets[i], MsgKind::kCar, payload);
            if (i >= targets.size() / 2)
                ctx.send(targets[i], MsgKind::kCar, twin_payload);
        }
        return;
    }

    Bytes payload = encode_message(CarMsg{car});
    for (ReplicaId to : targets)
        ctx.send(to, MsgKind::kCar, payload);
}

void Replica::handle_car(Context& ctx, const Car& car) {
    if (car.lane >= config_.n || car.lane == id_)
        return;
    Digest digest = car_digest(car);
    LaneVoter& voter = voters_[car.lane];
    switch (voter.consider(car, digest)) {
    case VoteOutcome::kVote:
        cars_.put(car);
        voter.record_vote(car.pos, digest);
        {
            CarVoteMsg vote{car.lane, car.pos, digest, keys_->sign(id_, digest)};
            ctx.send(car.lane, MsgKind::kCarVote, encode_message(vote));
        }
        try_vote_chain(ctx, car.lane);
        break;
    case VoteOutcome::kGap:
        cars_.put(car);
        stash_[car.lane].emplace(car.pos, car);
        // Pull the chain backwards from the gap; the owner is the only
        // known holder at this point.
        if (!cars_.contains(car.parent_ref))
            request_car(ctx, car.lane, car.parent_ref, {car.lane});
        ctx.trace(TraceKind::kCarVoteRejected, car.lane, car.pos,
                  static_cast<uint64_t>(VoteOutcome::kGap), 0, digest);
        break;
    case VoteOutcome::kEquivocation:
        ctx.trace(TraceKind::kEquivocationSeen, car.lane, car.pos, 0, 0, digest);
        break;
    case VoteOutcome::kParentMismatch:
        ctx.trace(TraceKind::kCarVoteRejected, car.lane, car.pos,
                  static_cast<uint64_t>(VoteOutcome::kParentMismatch), 0, digest);
        break;
    case VoteOutcome::kDuplicate:
        break;
    }
}

void Replica::try_vote_chain(Context& ctx, ReplicaId lane) {
    auto& stash = stash_[lane];
    while (true) {
        uint64_t next = static_cast<uint64_t>(voters_[lane].last_voted_pos() + 1);
        auto it = stash.find(next);
        if (it == stash.end())
            break;
        Car car = it->second;
        stash.erase(it);
        handle_car(ctx, car);
        if (voters_[lane].last_voted_pos() < static_cast<int64_t>(next))
            break;  // could not vote (parent mismatch); stop draining
    }
}

void Replica::handle_car_vote(Context& ctx, const CarVoteMsg& msg) {
    auto cert = owner_.add_vote(msg.pos, msg.car, msg.vote);
    if (!cert)
        return;
    ctx.trace(TraceKind::kPoAFormed, msg.pos, id_, 0, 0, msg.car);
    adopt_tip(id_, LaneTip{msg.pos, msg.car, *cert});
    PoAMsg poa{id_, msg.pos, *cert};
    Bytes payload = encode_message(poa);
    for (ReplicaId to = 0; to < config_.n; ++to)
        if (to != id_)
            ctx.send(to, MsgKind::kPoA, payload);
}

void Replica::handle_poa(Context& ctx, const PoAMsg& msg) {
    (void)ctx;
    if (msg.lane >= config_.n)
        return;
    if (!msg.cert.valid(*keys_, config_.f))
        return;
    adopt_tip(msg.lane, LaneTip{msg.pos, msg.cert.car_digest, msg.cert});
}

void Replica::adopt_tip(ReplicaId lane, const LaneTip& tip) {
    if (!known_tips_[lane] || tip.pos > known_tips_[lane]->pos)
        known_tips_[lane] = tip;
}

// --- consensus ---------------------------------------------------------------

void Replica::maybe_propose(Context& ctx, uint64_t slot) {
    SlotState& ss = slot_state(slot);
    if (ss.committed)
        return;
    uint64_t view = ss.current_view;
    if (leader_of(slot, view) != id_)
        return;
    PerView& pv = ss.views[view];
    if (pv.proposed)
        return;
    uint64_t now = ctx.now_ms();
    if (fault_window(config_.faults.silent_leader, config_.faults.silent_from_ms,
                     config_.faults.silent_to_ms, now))
        return;

    CutProposalMsg msg;
    msg.view = view;
    msg.proposer = id_;

    // Justification: the previous slot's PrepareQC activates this slot;
    // a timeout cert justifies any view above zero.
    if (slot > 0) {
        auto prev = slots_.find(slot - 1);
        if (prev == slots_.end() || !prev->second.high_prepare || !prev->second.high_prepare_cut)
            return;
        if (!config_.pipelining && !prev->second.committed)
            return;  // serialized slots when pipelining is off
        msg.prev_prepare = prev->second.high_prepare;
        msg.prev_cut = prev->second.high_prepare_cut;
    }
    if (view > 0) {
        if (!ss.entry_tc)
            return;
        msg.justify = ss.entry_tc;
    }

    if (view > 0 && ss.entry_tc->high_prepare_cut) {
        // Safety: re-propose the highest prepared cut.
        msg.cut = *ss.entry_tc->high_prepare_cut;
    } else if (view > 0 && ss.high_prepare_cut) {
        msg.cut = *ss.high_prepare_cut;
    } else {
        TipCut cut;
        cut.slot = slot;
        cut.tips.resize(config_.n);
        for (ReplicaId lane = 0; lane < config_.n; ++lane) {
            if (!known_tips_[lane])
                continue;
            const LaneTip& tip = *known_tips_[lane];
            cut.tips[lane] = TipEntry{true, tip.pos, tip.digest, tip.poa};
        }
        if (fault_window(config_.faults.omit_certified_tip, config_.faults.omit_from_ms,
                         config_.faults.omit_to_ms, now)) {
            // Report a stale tip for the next lane over: the previous
            // committed entry, or nothing at all.
            ReplicaId victim = (id_ + 1) % config_.n;
            TipEntry stale;
            if (slot > 0) {
                auto prev = slots_.find(slot - 1);
                if (prev != slots_.end() && prev->second.high_prepare_cut)
                    stale = prev->second.high_prepare_cut->tips[victim];
            }
            cut.tips[victim] = stale;
        }
        if (!tally_.halted()) {
            for (uint64_t height : tally_.ready_heights()) {
                TallyResult status = tally_.status(height);
                StateQuorumRecord record;
                record.height = height;
                record.commitment = status.value;
                record.sigs = status.sigs;
                record.committed_at = slot + 1;
                if (record.lag() >= config_.state_lag_bound) {
                    std::ostringstream msg_text;
                    msg_text << "state lag bound breached at embed: height " << height
                             << " lag " << record.lag();
                    ctx.violation(msg_text.str());
                    return;
                }
                cut.records.push_back(std::move(record));
            }
        }
        msg.cut = std::move(cut);
    }
    msg.cut.slot = slot;

    pv.proposed = true;
    ctx.trace(TraceKind::kCutProposed, slot, view, 0, 0, cut_digest(msg.cut));
    Bytes payload = encode_message(msg);
    for (ReplicaId to = 0; to < config_.n; ++to)
        ctx.send(to, MsgKind::kCutProposal, payload);  // includes self
}

bool Replica::validate_records(Context& ctx, const TipCut& cut) {
    uint64_t total_stake = 0;
    for (auto s : config_.stakes)
        total_stake += s;
    for (const auto& record : cut.records) {
        if (record.committed_at != cut.slot + 1 || record.height >= record.committed_at)
            return false;
        if (record.lag() >= config_.state_lag_bound) {
            std::ostringstream msg;
            msg << "state lag bound breached in proposal: height " << record.height << " lag "
                << record.lag();
            ctx.violation(msg.str());
            return false;
        }
        Digest expected = attestation_digest(record.height, record.commitment);
        uint64_t stake = 0;
        std::set<ReplicaId> signers;
        for (const auto& sig : record.sigs) {
            if (sig.signer >= config_.n || !keys_->verify(sig, expected))
                return false;
            if (signers.insert(sig.signer).second)
                stake += config_.stakes[sig.signer];
        }
        if (stake * 3 < total_stake * 2)
            return false;
    }
    return true;
}

void Replica::handle_proposal(Context& ctx, ReplicaId from, const CutProposalMsg& msg) {
    const uint64_t slot = msg.cut.slot;
    const uint64_t view = msg.view;
    if (msg.proposer != from || leader_of(slot, view) != msg.proposer)
        return;
    if (msg.cut.tips.size() != config_.n)
        return;

    SlotState& ss = slot_state(slot);
    if (view > ss.current_view) {
        // Catch up if the proposal carries a valid justification.
        if (!msg.justify || msg.justify->slot != slot || msg.justify->view != view - 1 ||
            !msg.justify->valid(*keys_, config_.n, config_.f))
            return;
        enter_view(ctx, slot, view, *msg.justify);
    } else if (view < ss.current_view) {
        return;  // stale view
    } else if (view > 0) {
        if (!msg.justify || msg.justify->slot != slot || msg.justify->view != view - 1 ||
            !msg.justify->valid(*keys_, config_.n, config_.f))
            return;
    }

    // Previous-slot link: required so committed tips stay monotone.
    if (slot > 0) {
        if (!msg.prev_prepare || !msg.prev_cut)
            return;
        if (msg.prev_prepare->phase != Phase::kPrepare || msg.prev_prepare->slot != slot - 1)
            return;
        if (!msg.prev_prepare->valid(*keys_, config_.n, config_.f))
            return;
        if (cut_digest(*msg.prev_cut) != msg.prev_prepare->cut)
            return;
        if (!tips_monotone(*msg.prev_cut, msg.cut))
            return;
        // Adopt the previous slot's prepare evidence and tips.
        SlotState& prev = slot_state(slot - 1);
        if (!prev.high_prepare || prev.high_prepare->view < msg.prev_prepare->view) {
            prev.high_prepare = msg.prev_prepare;
            prev.high_prepare_cut = msg.prev_cut;
        }
        for (ReplicaId lane = 0; lane < config_.n; ++lane) {
            const TipEntry& tip = msg.prev_cut->tips[lane];
            if (tip.has)
                adopt_tip(lane, LaneTip{tip.pos, tip.car, tip.poa});
        }
    }

    // Tip certificates.
    for (ReplicaId lane = 0; lane < config_.n; ++lane) {
        const TipEntry& tip = msg.cut.tips[lane];
        if (!tip.has)
            continue;
        if (tip.poa.car_digest != tip.car || !tip.poa.valid(*keys_, config_.f))
            return;
    }
    if (!validate_records(ctx, msg.cut))
        return;

    Digest digest = cut_digest(msg.cut);

    // View-change safety: a re-proposal must match the TC's highest prepared
    // cut; with no high_prepare in the TC, a replica already holding a
    // PrepareQC for this slot only accepts that same cut.
    if (view > 0) {
        const TimeoutCert& tc = *msg.justify;
        if (tc.high_prepare) {
            if (digest != tc.high_prepare->cut)
                return;
        } else if (ss.high_prepare && ss.high_prepare->cut != digest) {
            return;
        }
    }

    // Reliable-inclusion check: flag a proposer whose cut trails tips this
    // replica knows to be certified by more than one position (one position
    // of skew is normal PoA propagation race). Metric only; the leader may
    // simply know less than we do.
    for (ReplicaId lane = 0; lane < config_.n; ++lane) {
        if (!known_tips_[lane])
            continue;
        const TipEntry& tip = msg.cut.tips[lane];
        if (!tip.has || tip.pos + 1 < known_tips_[lane]->pos)
            ctx.trace(TraceKind::kInclusionFlag, slot, lane, 0, 0, digest);
    }

    for (ReplicaId lane = 0; lane < config_.n; ++lane) {
        const TipEntry& tip = msg.cut.tips[lane];
        if (tip.has)
            adopt_tip(lane, LaneTip{tip.pos, tip.car, tip.poa});
    }

    PerView& pv = ss.views[view];
    if (pv.proposal)
        return;  // one proposal per view
    pv.proposal = msg.cut;

    if (ss.pending_commit && ss.pending_commit->digest == digest) {
        PendingCommit pending = *ss.pending_commit;
        commit_cut(ctx, slot, pending.view, pending.digest, pending.bitmap);
        return;
    }

    if (!pv.prepare_voted) {
        pv.prepare_voted = true;
        Signature sig = keys_->sign(id_, phase_vote_digest(Phase::kPrepare, slot, view, digest));
        pv.votes[digest].prepare.emplace(id_, sig);
        PhaseVoteMsg vote{Phase::kPrepare, slot, view, digest, sig};
        Bytes payload = encode_message(vote);
        if (config_.pipelining) {
            for (ReplicaId to = 0; to < config_.n; ++to)
                if (to != id_)
                    ctx.send(to, MsgKind::kPhaseVote, payload);
        } else if (msg.proposer != id_) {
            ctx.send(msg.proposer, MsgKind::kPhaseVote, payload);
        }
    }
    dirty_slots_.insert(slot);
}

void Replica::handle_phase_vote(Context& ctx, const PhaseVoteMsg& msg) {
    (void)ctx;
    if (!keys_->verify(msg.vote, phase_vote_digest(msg.phase, msg.slot, msg.view, msg.cut)))
        return;
    PerView& pv = slot_state(msg.slot).views[msg.view];
    VoteBuckets& buckets = pv.votes[msg.cut];
    switch (msg.phase) {
    case Phase::kPrepare: buckets.prepare.emplace(msg.vote.signer, msg.vote); break;
    case Phase::kCommit: buckets.commit.emplace(msg.vote.signer, msg.vote); break;
    case Phase::kConfirm: buckets.confirm.emplace(msg.vote.signer, msg.vote); break;
    }
    dirty_slots_.insert(msg.slot);
}

std::optional<QuorumCert> Replica::assemble_qc(Phase phase, uint64_t slot, uint64_t view,
                                               const Digest& digest,
                                               const std::map<ReplicaId, Signature>& votes) const {
    if (votes.size() < qc_quorum(config_.n, config_.f))
        return std::nullopt;
    QuorumCert qc;
    qc.phase = phase;
    qc.slot = slot;
    qc.view = view;
    qc.cut = digest;
    for (const auto& [signer, sig] : votes)
        qc.votes.push_back(sig);
    return qc;
}

void Replica::on_prepare_qc(Context& ctx, uint64_t slot, uint64_t view, const Digest& digest) {
    SlotState& ss = slot_state(slot);
    PerView& pv = ss.views[view];
    if (!ss.high_prepare || ss.high_prepare->view <= view) {
        ss.high_prepare = pv.prepare_qc;
        if (pv.proposal && cut_digest(*pv.proposal) == digest)
            ss.high_prepare_cut = pv.proposal;
    }
    ctx.trace(TraceKind::kPrepareQcFormed, slot, view, 0, 0, digest);

    // Commit phase: votes go everywhere when pipelining (so anyone can form
    // the CommitQC), otherwise to the leader.
    if (pv.proposal && cut_digest(*pv.proposal) == digest && !pv.commit_voted) {
        pv.commit_voted = true;
        Signature sig = keys_->sign(id_, phase_vote_digest(Phase::kCommit, slot, view, digest));
        pv.votes[digest].commit.emplace(id_, sig);
        PhaseVoteMsg vote{Phase::kCommit, slot, view, digest, sig};
        Bytes payload = encode_message(vote);
        if (config_.pipelining) {
            for (ReplicaId to = 0; to < config_.n; ++to)
                if (to != id_)
                    ctx.send(to, MsgKind::kPhaseVote, payload);
        } else {
            ReplicaId leader = leader_of(slot, view);
            if (leader != id_)
                ctx.send(leader, MsgKind::kPhaseVote, payload);
        }
        dirty_slots_.insert(slot);
    }

    // Pipelining: seeing the previous slot prepared unlocks the next slot.
    if (config_.pipelining)
        maybe_propose(ctx, slot + 1);
}

void Replica::evaluate_slot(Context& ctx, uint64_t slot) {
    SlotState& ss = slot_state(slot);
    for (auto& [view, pv] : ss.views) {
        for (auto& [digest, buckets] : pv.votes) {
            // PrepareQC: in star mode only the leader sees the votes, so
            // formation is naturally leader-side there.
            if (!pv.prepare_qc && buckets.prepare.size() >= qc_quorum(config_.n, config_.f)) {
                pv.prepare_qc = assemble_qc(Phase::kPrepare, slot, view, digest, buckets.prepare);
                if (!config_.pipelining) {
                    QcRelayMsg relay{*pv.prepare_qc, false};
                    Bytes payload = encode_message(relay);
                    for (ReplicaId to = 0; to < config_.n; ++to)
                        if (to != id_)
                            ctx.send(to, MsgKind::kQcRelay, payload);
                }
                on_prepare_qc(ctx, slot, view, digest);
            }

            if (ss.committed)
                continue;
            size_t commit_votes = buckets.commit.size();
            if (commit_votes == 0)
                continue;

            if (config_.pipelining) {
                if (commit_votes >= config_.n) {
                    commit_cut(ctx, slot, view, digest,
                               assemble_qc(Phase::kCommit, slot, view, digest, buckets.commit)
                                   ->signer_bitmap());
                    continue;
                }
                if (commit_votes >= qc_quorum(config_.n, config_.f)) {
                    // Only n-f commit votes: run the confirm round.
                    if (!pv.confirm_sent) {
                        pv.confirm_sent = true;
                        Signature sig = keys_->sign(
                            id_, phase_vote_digest(Phase::kConfirm, slot, view, digest));
                        buckets.confirm.emplace(id_, sig);
                        PhaseVoteMsg ack{Phase::kConfirm, slot, view, digest, sig};
                        Bytes payload = encode_message(ack);
                        for (ReplicaId to = 0; to < config_.n; ++to)
                            if (to != id_)
                                ctx.send(to, MsgKind::kPhaseVote, payload);
                    }
                    if (buckets.confirm.size() >= confirm_quorum(config_.f)) {
                        commit_cut(ctx, slot, view, digest,
                                   assemble_qc(Phase::kCommit, slot, view, digest, buckets.commit)
                                       ->signer_bitmap());
                    }
                }
            } else if (leader_of(slot, view) == id_) {
                // Star mode: the leader completes the commit and announces it.
                auto qc = assemble_qc(Phase::kCommit, slot, view, digest, buckets.commit);
                if (!qc)
                    continue;
                if (commit_votes >= config_.n) {
                    CommitCertMsg cert{*qc, {}};
                    Bytes payload = encode_message(cert);
                    for (ReplicaId to = 0; to < config_.n; ++to)
                        if (to != id_)
                            ctx.send(to, MsgKind::kCommitCert, payload);
                    commit_cut(ctx, slot, view, digest, qc->signer_bitmap());
                } else {
                    if (!pv.needs_confirm_relay) {
                        pv.needs_confirm_relay = true;
                        QcRelayMsg relay{*qc, true};
                        Bytes payload = encode_message(relay);
                        for (ReplicaId to = 0; to < config_.n; ++to)
                            if (to != id_)
                                ctx.send(to, MsgKind::kQcRelay, payload);
                        Signature sig = keys_->sign(
                            id_, phase_vote_digest(Phase::kConfirm, slot, view, digest));
                        buckets.confirm.emplace(id_, sig);
                    }
                    if (buckets.confirm.size() >= confirm_quorum(config_.f)) {
                        CommitCertMsg cert{*qc, {}};
                        for (const auto& [signer, sig] : buckets.confirm)
                            cert.confirms.push_back(sig);
                        Bytes payload = encode_message(cert);
                        for (ReplicaId to = 0; to < config_.n; ++to)
                            if (to != id_)
                                ctx.send(to, MsgKind::kCommitCert, payload);
                        commit_cut(ctx, slot, view, digest, qc->signer_bitmap());
                    }
                }
            }
        }

    }

    // Timeout certificates: independent of any proposal having been seen.
    for (auto& [view, votes] : ss.timeout_votes) {
        if (ss.committed || view < ss.current_view ||
            votes.size() < qc_quorum(config_.n, config_.f))
            continue;
        TimeoutCert tc;
        tc.slot = slot;
        tc.view = view;
        for (const auto& [signer, vote] : votes) {
            tc.votes.push_back(vote.vote);
            if (vote.high_prepare &&
                (!tc.high_prepare || vote.high_prepare->view > tc.high_prepare->view)) {
                tc.high_prepare = vote.high_prepare;
                tc.high_prepare_cut = vote.high_prepare_cut;
            }
        }
        TimeoutCertMsg msg{tc};
        Bytes payload = encode_message(msg);
        for (ReplicaId to = 0; to < config_.n; ++to)
            if (to != id_)
                ctx.send(to, MsgKind::kTimeoutCert, payload);
        enter_view(ctx, slot, view + 1, tc);
        break;
    }
}

void Replica::commit_cut(Context& ctx, uint64_t slot, uint64_t view, const Digest& digest,
                         uint32_t signer_bitmap) {
    SlotState& ss = slot_state(slot);
    if (ss.committed) {
        // A second certificate for the same slot must cover the same cut.
        if (committed_.contains(slot) && cut_digest(committed_[slot]) != digest)
            ctx.violation("conflicting commit certificates in one slot");
        return;
    }

    // Locate the cut body.
    const TipCut* cut = nullptr;
    for (auto& [v, pv] : ss.views)
        if (pv.proposal && cut_digest(*pv.proposal) == digest)
            cut = &*pv.proposal;
    if (cut == nullptr && ss.high_prepare_cut && cut_digest(*ss.high_prepare_cut) == digest)
        cut = &*ss.high_prepare_cut;
    if (cut == nullptr) {
        // The certificate outran the proposal (chaotic delays can reorder
        // arbitrarily); finish the commit once the body arrives.
        ss.pending_commit = PendingCommit{view, digest, signer_bitmap};
        return;
    }
    ss.pending_commit.reset();

    // Per-lane committed positions never move backwards.
    if (slot > 0) {
        for (uint64_t prior = slot; prior-- > 0;) {
            auto it = committed_.find(prior);
            if (it == committed_.end())
                continue;
            if (!tips_monotone(it->second, *cut))
                ctx.violation("committed tip positions regressed");
            break;
        }
    }

    ss.committed = true;
    ss.committed_view = view;
    committed_[slot] = *cut;
    while (committed_.contains(low_watermark_))
        ++low_watermark_;

    JournalEntry entry;
    entry.slot = slot;
    entry.view = view;
    entry.cut = digest;
    for (const auto& tip : cut->tips)
        entry.lane_tips.emplace_back(tip.has, tip.pos);
    entry.commit_signer_bitmap = signer_bitmap;
    journal_.push_back(std::move(entry));

    ctx.trace(TraceKind::kCommitted, slot, view, 0, 0, digest);

    for (ReplicaId lane = 0; lane < config_.n; ++lane) {
        const TipEntry& tip = cut->tips[lane];
        if (tip.has)
            adopt_tip(lane, LaneTip{tip.pos, tip.car, tip.poa});
    }

    for (const auto& record : cut->records) {
        if (quorum_records_.contains(record.height))
            continue;
        quorum_records_[record.height] = record;
        max_state_lag_ = std::max(max_state_lag_, record.lag());
        ctx.trace(TraceKind::kStateQuorum, record.height, record.committed_at, record.lag(), 0,
                  bytes32_digest(record.commitment));
        tally_.mark_embedded(record.height);
    }

    arm_slot_timer(ctx);
    maybe_propose(ctx, slot + 1);
    try_execute(ctx);
}

void Replica::enter_view(Context& ctx, uint64_t slot, uint64_t view, std::optional<TimeoutCert> tc) {
    SlotState& ss = slot_state(slot);
    if (view <= ss.current_view || ss.committed)
        return;
    ss.current_view = view;
    ss.entry_tc = std::move(tc);
    ss.consecutive_timeouts++;
    ctx.trace(TraceKind::kViewChange, slot, view, 0, 0, {});
    arm_slot_timer(ctx);
    maybe_propose(ctx, slot);
}

void Replica::arm_slot_timer(Context& ctx) {
    uint64_t wm = watermark_slot();
    SlotState& ss = slot_state(wm);
    if (armed_timer_slot_ == wm && armed_timer_view_ == ss.current_view)
        return;
    armed_timer_slot_ = wm;
    armed_timer_view_ = ss.current_view;
    double scale = 1.0;
    for (uint32_t i = 0; i < ss.consecutive_timeouts; ++i)
        scale *= config_.timeout_backoff;
    uint64_t period = static_cast<uint64_t>(static_cast<double>(config_.timeout_ms) * scale);
    new_timer(ctx, ctx.now_ms() + period, {TimerDesc::Kind::kSlotTimeout, wm, ss.current_view, {}});
}

void Replica::handle_timeout_vote(Context& ctx, const TimeoutVoteMsg& msg) {
    (void)ctx;
    if (!keys_->verify(msg.vote, timeout_vote_digest(msg.slot, msg.view)))
        return;
    TimeoutVoteMsg stored = msg;
    if (stored.high_prepare) {
        bool ok = stored.high_prepare->phase == Phase::kPrepare &&
                  stored.high_prepare->slot == msg.slot && stored.high_prepare_cut &&
                  cut_digest(*stored.high_prepare_cut) == stored.high_prepare->cut &&
                  stored.high_prepare->valid(*keys_, config_.n, config_.f);
        if (!ok) {
            stored.high_prepare.reset();
            stored.high_prepare_cut.reset();
        }
    }
    slot_state(msg.slot).timeout_votes[msg.view].emplace(msg.vote.signer, std::move(stored));
    dirty_slots_.insert(msg.slot);
}

void Replica::handle_timeout_cert(Context& ctx, const TimeoutCert& cert) {
    if (!cert.valid(*keys_, config_.n, config_.f))
        return;
    SlotState& ss = slot_state(cert.slot);
    if (cert.high_prepare && (!ss.high_prepare || ss.high_prepare->view < cert.high_prepare->view)) {
        ss.high_prepare = cert.high_prepare;
        ss.high_prepare_cut = cert.high_prepare_cut;
    }
    enter_view(ctx, cert.slot, cert.view + 1, cert);
}

void Replica::handle_qc_relay(Context& ctx, const QcRelayMsg& msg) {
    const QuorumCert& qc = msg.qc;
    if (!qc.valid(*keys_, config_.n, config_.f))
        return;
    SlotState& ss = slot_state(qc.slot);
    PerView& pv = ss.views[qc.view];
    if (qc.phase == Phase::kPrepare) {
        if (!pv.prepare_qc) {
            pv.prepare_qc = qc;
            on_prepare_qc(ctx, qc.slot, qc.view, qc.cut);
        }
    } else if (qc.phase == Phase::kCommit && msg.needs_confirm) {
        if (!pv.confirm_sent) {
            pv.confirm_sent = true;
            Signature sig =
                keys_->sign(id_, phase_vote_digest(Phase::kConfirm, qc.slot, qc.view, qc.cut));
            PhaseVoteMsg ack{Phase::kConfirm, qc.slot, qc.view, qc.cut, sig};
            ReplicaId leader = leader_of(qc.slot, qc.view);
            if (leader != id_)
                ctx.send(leader, MsgKind::kPhaseVote, encode_message(ack));
        }
    }
}

void Replica::handle_commit_cert(Context& ctx, const CommitCertMsg& msg) {
    if (!msg.valid(*keys_, config_.n, config_.f))
        return;
    commit_cut(ctx, msg.commit_qc.slot, msg.commit_qc.view, msg.commit_qc.cut,
               msg.commit_qc.signer_bitmap());
}

// --- execution ----------------------------------------------------------------

void Replica::request_car(Context& ctx, ReplicaId lane, const Digest& digest,
                          std::vector<ReplicaId> sources) {
    if (cars_.contains(digest))
        return;
    std::erase(sources, id_);
    auto existing = pending_fetches_.find(digest);
    if (existing != pending_fetches_.end()) {
        // Already in flight: widen the source set (a sync request may have
        // known only the withholding owner; PoA signers can serve).
        for (ReplicaId source : sources) {
            auto& known = existing->second.sources;
            if (std::find(known.begin(), known.end(), source) == known.end())
                known.push_back(source);
        }
        return;
    }
    if (sources.empty())
        return;
    PendingFetch fetch;
    fetch.lane = lane;
    fetch.sources = std::move(sources);
    ctx.send(fetch.sources[0], MsgKind::kFetchRequest, encode_message(FetchRequestMsg{digest}));
    fetch.next_source = 1 % fetch.sources.size();
    pending_fetches_[digest] = std::move(fetch);
    ctx.trace(TraceKind::kFetchRequested, lane, 0, 0, 0, digest);
    new_timer(ctx, ctx.now_ms() + config_.fetch_retry_ms,
              {TimerDesc::Kind::kFetchRetry, 0, 0, digest});
}

void Replica::handle_fetch_request(Context& ctx, ReplicaId from, const FetchRequestMsg& msg) {
    if (fault_window(config_.faults.withhold_batch, config_.faults.withhold_from_ms,
                     config_.faults.withhold_to_ms, ctx.now_ms()))
        return;  // scripted data withholding
    const Car* car = cars_.get(msg.car);
    if (car == nullptr)
        return;
    ctx.trace(TraceKind::kFetchServed, 0, 0, 0, 0, msg.car);
    ctx.send(from, MsgKind::kFetchResponse, encode_message(FetchResponseMsg{*car}));
}

void Replica::handle_fetch_response(Context& ctx, const FetchResponseMsg& msg) {
    Digest digest = car_digest(msg.car);
    cars_.put(msg.car);
    auto it = pending_fetches_.find(digest);
    if (it == pending_fetches_.end())
        return;
    ReplicaId lane = it->second.lane;
    pending_fetches_.erase(it);
    ctx.trace(TraceKind::kFetchCompleted, lane, 0, 0, 0, digest);
    if (lane < config_.n && lane != id_) {
        // The fetched car may extend the votable chain.
        stash_[lane].emplace(msg.car.pos, msg.car);
        try_vote_chain(ctx, lane);
    }
    try_execute(ctx);
}

void Replica::try_execute(Context& ctx) {
    while (true) {
        auto it = committed_.find(next_exec_slot_);
        if (it == committed_.end())
            return;
        const TipCut& cut = it->second;
        auto missing = linearizer_.missing_cars(cut, cars_);
        if (!missing.empty()) {
            for (const auto& [lane, digest] : missing) {
                std::vector<ReplicaId> sources;
                for (const auto& sig : cut.tips[lane].poa.votes)
                    sources.push_back(sig.signer);
                request_car(ctx, lane, digest, std::move(sources));
            }
            return;
        }
        if (config_.exec_delay_ms > 0) {
            if (!exec_timer_armed_) {
                exec_timer_armed_ = true;
                new_timer(ctx, ctx.now_ms() + config_.exec_delay_ms,
                          {TimerDesc::Kind::kExecDelay, next_exec_slot_, 0, {}});
            }
            return;
        }
        execute_block(ctx, next_exec_slot_);
    }
}

void Replica::execute_block(Context& ctx, uint64_t slot) {
    const TipCut& cut = committed_.at(slot);
    uint64_t height = slot + 1;
    Block block = linearizer_.expand(cut, cars_, height);

    OccConfig occ;
    occ.workers = config_.exec_workers;
    occ.mode = OccConfig::Mode::kDeterministic;
    occ.sched_seed = height * 0x9e3779b97f4a7c15ull ^ id_;
    occ.retry_budget = config_.occ_retry_budget;
    ParallelResult result = exec_block_parallel(state_, block.txs, occ);

    std::map<Location, Bytes32> merged;
    for (const Receipt& receipt : result.receipts) {
        for (const auto& [loc, value] : receipt.writes) {
            auto old = state_.get(loc);
            std::optional<std::pair<Location, Bytes32>> old_entry;
            if (old)
                old_entry = std::make_pair(loc, *old);
            std::optional<std::pair<Location, Bytes32>> new_entry;
            if (!value.is_zero())
                new_entry = std::make_pair(loc, value);
            commitment_ = update_commitment(commitment_, old_entry, new_entry);
            state_.set(loc, value);
            merged[loc] = value;
        }
    }
    state_.height = height;
    commitment_.height = height;
    store_.apply_block(height, merged);
    commitments_.push_back(commitment_.value);
    ++blocks_executed_;

    ctx.trace(TraceKind::kBlockExecuted, height, block.txs.size(), result.stats.aborts,
              block.duplicates_skipped, bytes32_digest(commitment_.value));
    if (result.stats.fallback)
        ctx.trace(TraceKind::kExecFallback, height, 0, 0, 0, {});

    // Delayed state consensus: attest our root (possibly biased by a fault)
    // and feed attestations the block carried into the tally.
    Bytes32 attested = commitment_.value;
    if (config_.faults.wrong_state_root)
        attested.bytes[0] ^= config_.faults.root_bias;
    StateAttestation own = make_attestation(*keys_, id_, height, attested);
    pending_txs_.push_back(attestation_tx_bytes(own, config_.chain_id));
    ctx.trace(TraceKind::kAttested, height, 0, 0, 0, bytes32_digest(attested));

    for (const Transaction& tx : block.txs) {
        auto attestation = parse_attestation_tx(tx);
        if (!attestation)
            continue;
        if (attestation->signer >= config_.n || !verify_attestation(*keys_, *attestation))
            continue;
        tally_.add(*attestation);
    }
    if (tally_.halted() && !halt_traced_) {
        halt_traced_ = true;
        ctx.trace(TraceKind::kHalted, tally_.halted_height(), 0, 0, 0, {});
    }

    ++next_exec_slot_;
}

// --- event entry points --------------------------------------------------------

void Replica::on_message(Context& ctx, ReplicaId from, ByteView payload) {
    MsgKind kind;
    try {
        kind = peek_kind(payload);
        switch (kind) {
        case MsgKind::kCar: {
            CarMsg msg = decode_car_msg(payload);
            if (msg.car.lane != from)
                return;  // only a lane's owner may extend it
            handle_car(ctx, msg.car);
            break;
        }
        case MsgKind::kCarVote: {
            CarVoteMsg msg = decode_car_vote_msg(payload);
            if (msg.vote.signer != from)
                return;
            handle_car_vote(ctx, msg);
            break;
        }
        case MsgKind::kPoA:
            handle_poa(ctx, decode_poa_msg(payload));
            break;
        case MsgKind::kCutProposal:
            handle_proposal(ctx, from, decode_cut_proposal_msg(payload));
            break;
        case MsgKind::kPhaseVote: {
            PhaseVoteMsg msg = decode_phase_vote_msg(payload);
            if (msg.vote.signer != from)
                return;
            handle_phase_vote(ctx, msg);
            break;
        }
        case MsgKind::kQcRelay:
            handle_qc_relay(ctx, decode_qc_relay_msg(payload));
            break;
        case MsgKind::kCommitCert:
            handle_commit_cert(ctx, decode_commit_cert_msg(payload));
            break;
        case MsgKind::kTimeoutVote: {
            TimeoutVoteMsg msg = decode_timeout_vote_msg(payload);
            if (msg.vote.signer != from)
                return;
            handle_timeout_vote(ctx, msg);
            break;
        }
        case MsgKind::kTimeoutCert:
            handle_timeout_cert(ctx, decode_timeout_cert_msg(payload).cert);
            break;
        case MsgKind::kFetchRequest:
            handle_fetch_request(ctx, from, decode_fetch_request_msg(payload));
            break;
        case MsgKind::kFetchResponse:
            handle_fetch_response(ctx, decode_fetch_response_msg(payload));
            break;
        }
    } catch (const DecodeError&) {
        // Garbage from a faulty peer is dropped.
    }
}

void Replica::on_batch_end(Context& ctx) {
    while (!dirty_slots_.empty()) {
        std::set<uint64_t> slots;
        slots.swap(dirty_slots_);
        for (uint64_t slot : slots)
            evaluate_slot(ctx, slot);
    }
}

void Replica::on_timer(Context& ctx, uint64_t timer_id) {
    auto it = timers_.find(timer_id);
    if (it == timers_.end())
        return;
    TimerDesc desc = it->second;
    timers_.erase(it);

    switch (desc.kind) {
    case TimerDesc::Kind::kCarTick:
        car_tick(ctx);
        break;
    case TimerDesc::Kind::kSlotTimeout: {
        SlotState& ss = slot_state(desc.slot);
        if (ss.committed || desc.slot != watermark_slot() || desc.view != ss.current_view)
            return;
        // No progress: vote to change the view, carrying our best prepare
        // evidence for safety across the change.
        TimeoutVoteMsg vote;
        vote.slot = desc.slot;
        vote.view = desc.view;
        vote.vote = keys_->sign(id_, timeout_vote_digest(desc.slot, desc.view));
        if (ss.high_prepare && ss.high_prepare_cut) {
            vote.high_prepare = ss.high_prepare;
            vote.high_prepare_cut = ss.high_prepare_cut;
        }
        Bytes payload = encode_message(vote);
        for (ReplicaId to = 0; to < config_.n; ++to)
            if (to != id_)
                ctx.send(to, MsgKind::kTimeoutVote, payload);
        ss.timeout_votes[desc.view].emplace(id_, vote);
        dirty_slots_.insert(desc.slot);
        // Re-arm so a stalled view change keeps retrying.
        armed_timer_slot_ = UINT64_MAX;
        arm_slot_timer(ctx);
        break;
    }
    case TimerDesc::Kind::kFetchRetry: {
        auto fetch = pending_fetches_.find(desc.digest);
        if (fetch == pending_fetches_.end())
            return;
        PendingFetch& pf = fetch->second;
        ReplicaId source = pf.sources[pf.next_source];
        pf.next_source = (pf.next_source + 1) % pf.sources.size();
        ctx.send(source, MsgKind::kFetchRequest, encode_message(FetchRequestMsg{desc.digest}));
        new_timer(ctx, ctx.now_ms() + config_.fetch_retry_ms,
                  {TimerDesc::Kind::kFetchRetry, 0, 0, desc.digest});
        break;
    }
    case TimerDesc::Kind::kExecDelay:
        exec_timer_armed_ = false;
        if (committed_.contains(next_exec_slot_) && next_exec_slot_ == desc.slot) {
            const TipCut& cut = committed_.at(desc.slot);
            if (linearizer_.missing_cars(cut, cars_).empty())
                execute_block(ctx, desc.slot);
        }
        try_execute(ctx);
        break;
    }
}

void Replica::on_client_tx(Context& ctx, Bytes tx_bytes) {
    (void)ctx;
    pending_txs_.push_back(std::move(tx_bytes));
}

}  // namespace lanebft
