// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/messages.hpp>

namespace lanebft {

const char* msg_kind_name(MsgKind kind) {
    switch (kind) {
    case MsgKind::kCar: return "car";
    case MsgKind::kCarVote: return "car_vote";
    case MsgKind::kPoA: return "poa";
    case MsgKind::kCutProposal: return "cut_proposal";
    case MsgKind::kPhaseVote: return "phase_vote";
    case MsgKind::kQcRelay: return "qc_relay";
    case MsgKind::kCommitCert: return "commit_cert";
    case MsgKind::kTimeoutVote: return "timeout_vote";
    case MsgKind::kTimeoutCert: return "timeout_cert";
    case MsgKind::kFetchRequest: return "fetch_request";
    case MsgKind::kFetchResponse: return "fetch_response";
    }
    return "?";
}

namespace {

void put_signature(ByteWriter& w, const Signature& sig) {
    w.u32(sig.signer);
    w.raw(sig.tag);
}

Signature read_signature(ByteReader& r) {
    Signature sig;
    sig.signer = r.u32();
    sig.tag = r.array<32>();
    return sig;
}

void put_signatures(ByteWriter& w, const std::vector<Signature>& sigs) {
    w.u16(static_cast<uint16_t>(sigs.size()));
    for (const auto& sig : sigs)
        put_signature(w, sig);
}

std::vector<Signature> read_signatures(ByteReader& r) {
    uint16_t count = r.u16();
    std::vector<Signature> sigs;
    sigs.reserve(std::min<size_t>(count, r.remaining() / 36 + 1));
    for (uint16_t i = 0; i < count; ++i)
        sigs.push_back(read_signature(r));
    return sigs;
}

void put_qc(ByteWriter& w, const QuorumCert& qc) {
    w.u8(static_cast<uint8_t>(qc.phase));
    w.u64(qc.slot);
    w.u64(qc.view);
    w.raw(qc.cut.bytes);
    put_signatures(w, qc.votes);
}

QuorumCert read_qc(ByteReader& r) {
    QuorumCert qc;
    qc.phase = static_cast<Phase>(r.u8());
    qc.slot = r.u64();
    qc.view = r.u64();
    qc.cut.bytes = r.array<32>();
    qc.votes = read_signatures(r);
    return qc;
}

void put_cut(ByteWriter& w, const TipCut& cut) {
    Bytes body = encode_tip_cut(cut);
    w.u32(static_cast<uint32_t>(body.size()));
    w.raw(body);
}

TipCut read_cut(ByteReader& r) {
    uint32_t len = r.u32();
    return decode_tip_cut(r.bytes(len));
}

void put_tc(ByteWriter& w, const TimeoutCert& tc) {
    w.u64(tc.slot);
    w.u64(tc.view);
    put_signatures(w, tc.votes);
    w.u8(tc.high_prepare ? 1 : 0);
    if (tc.high_prepare) {
        put_qc(w, *tc.high_prepare);
        put_cut(w, *tc.high_prepare_cut);
    }
}

TimeoutCert read_tc(ByteReader& r) {
    TimeoutCert tc;
    tc.slot = r.u64();
    tc.view = r.u64();
    tc.votes = read_signatures(r);
    if (r.u8()) {
        tc.high_prepare = read_qc(r);
        tc.high_prepare_cut = read_cut(r);
    }
    return tc;
}

ByteReader open_payload(ByteView payload, MsgKind expected) {
    ByteReader r(payload);
    if (r.u8() != static_cast<uint8_t>(expected))
        throw DecodeError("unexpected message kind", 0);
    return r;
}

}  // namespace

bool CommitCertMsg::valid(const KeyRegistry& keys, uint32_t n, uint32_t f) const {
    if (commit_qc.phase != Phase::kCommit || !commit_qc.valid(keys, n, f))
        return false;
    std::set<ReplicaId> commit_signers;
    for (const auto& vote : commit_qc.votes)
        commit_signers.insert(vote.signer);
    if (commit_signers.size() >= n)
        return true;  // all replicas voted: no confirm phase needed
    Digest msg = phase_vote_digest(Phase::kConfirm, commit_qc.slot, commit_qc.view, commit_qc.cut);
    std::set<ReplicaId> confirm_signers;
    for (const auto& sig : confirms) {
        if (sig.signer >= n || !keys.verify(sig, msg))
            return false;
        confirm_signers.insert(sig.signer);
    }
    return confirm_signers.size() >= confirm_quorum(f);
}

Bytes encode_message(const CarMsg& m) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(MsgKind::kCar));
    w.raw(encode_car(m.car));
    return w.take();
}

CarMsg decode_car_msg(ByteView payload) {
    ByteReader r = open_payload(payload, MsgKind::kCar);
    return CarMsg{decode_car(r.rest())};
}

Bytes encode_message(const CarVoteMsg& m) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(MsgKind::kCarVote));
    w.u32(m.lane);
    w.u64(m.pos);
    w.raw(m.car.bytes);
    put_signature(w, m.vote);
    return w.take();
}

CarVoteMsg decode_car_vote_msg(ByteView payload) {
    ByteReader r = open_payload(payload, MsgKind::kCarVote);
    CarVoteMsg m;
    m.lane = r.u32();
    m.pos = r.u64();
    m.car.bytes = r.array<32>();
    m.vote = read_signature(r);
    return m;
}

Bytes encode_message(const PoAMsg& m) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(MsgKind::kPoA));
    w.u32(m.lane);
    w.u64(m.pos);
    w.raw(m.cert.car_digest.bytes);
    put_signatures(w, m.cert.votes);
    return w.take();
}

PoAMsg decode_poa_msg(ByteView payload) {
    ByteReader r = open_payload(payload, MsgKind::kPoA);
    PoAMsg m;
    m.lane = r.u32();
    m.pos = r.u64();
    m.cert.car_digest.bytes = r.array<32>();
    m.cert.votes = read_signatures(r);
    return m;
}

Bytes encode_message(const CutProposalMsg& m) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(MsgKind::kCutProposal));
    w.u64(m.view);
    w.u32(m.proposer);
    put_cut(w, m.cut);
    w.u8(m.prev_prepare ? 1 : 0);
    if (m.prev_prepare) {
        put_qc(w, *m.prev_prepare);
        put_cut(w, *m.prev_cut);
    }
    w.u8(m.justify ? 1 : 0);
    if (m.justify)
        put_tc(w, *m.justify);
    return w.take();
}

CutProposalMsg decode_cut_proposal_msg(ByteView payload) {
    ByteReader r = open_payload(payload, MsgKind::kCutProposal);
    CutProposalMsg m;
    m.view = r.u64();
    m.proposer = r.u32();
    m.cut = read_cut(r);
    if (r.u8()) {
        m.prev_prepare = read_qc(r);
        m.prev_cut = read_cut(r);
    }
    if (r.u8())
        m.justify = read_tc(r);
    return m;
}

Bytes encode_message(const PhaseVoteMsg& m) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(MsgKind::kPhaseVote));
    w.u8(static_cast<uint8_t>(m.phase));
    w.u64(m.slot);
    w.u64(m.view);
    w.raw(m.cut.bytes);
    put_signature(w, m.vote);
    return w.take();
}

PhaseVoteMsg decode_phase_vote_msg(ByteView payload) {
    ByteReader r = open_payload(payload, MsgKind::kPhaseVote);
    PhaseVoteMsg m;
    uint8_t phase = r.u8();
    if (phase > static_cast<uint8_t>(Phase::kConfirm))
        throw DecodeError("unknown phase", 1);
    m.phase = static_cast<Phase>(phase);
    m.slot = r.u64();
    m.view = r.u64();
    m.cut.bytes = r.array<32>();
    m.vote = read_signature(r);
    return m;
}

Bytes encode_message(const QcRelayMsg& m) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(MsgKind::kQcRelay));
    w.u8(m.needs_confirm ? 1 : 0);
    put_qc(w, m.qc);
    return w.take();
}

QcRelayMsg decode_qc_relay_msg(ByteView payload) {
    ByteReader r = open_payload(payload, MsgKind::kQcRelay);
    QcRelayMsg m;
    m.needs_confirm = r.u8() != 0;
    m.qc = read_qc(r);
    return m;
}

Bytes encode_message(const CommitCertMsg& m) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(MsgKind::kCommitCert));
    put_qc(w, m.commit_qc);
    put_signatures(w, m.confirms);
    return w.take();
}

CommitCertMsg decode_commit_cert_msg(ByteView payload) {
    ByteReader r = open_payload(payload, MsgKind::kCommitCert);
    CommitCertMsg m;
    m.commit_qc = read_qc(r);
    m.confirms = read_signatures(r);
    return m;
}

Bytes encode_message(const TimeoutVoteMsg& m) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(MsgKind::kTimeoutVote));
    w.u64(m.slot);
    w.u64(m.view);
    put_signature(w, m.vote);
    w.u8(m.high_prepare ? 1 : 0);
    if (m.high_prepare) {
        put_qc(w, *m.high_prepare);
        put_cut(w, *m.high_prepare_cut);
    }
    return w.take();
}

TimeoutVoteMsg decode_timeout_vote_msg(ByteView payload) {
    ByteReader r = open_payload(payload, MsgKind::kTimeoutVote);
    TimeoutVoteMsg m;
    m.slot = r.u64();
    m.view = r.u64();
    m.vote = read_signature(r);
    if (r.u8()) {
        m.high_prepare = read_qc(r);
        m.high_prepare_cut = read_cut(r);
    }
    return m;
}

Bytes encode_message(const TimeoutCertMsg& m) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(MsgKind::kTimeoutCert));
    put_tc(w, m.cert);
    return w.take();
}

TimeoutCertMsg decode_timeout_cert_msg(ByteView payload) {
    ByteReader r = open_payload(payload, MsgKind::kTimeoutCert);
    return TimeoutCertMsg{read_tc(r)};
}

Bytes encode_message(const FetchRequestMsg& m) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(MsgKind::kFetchRequest));
    w.raw(m.car.bytes);
    return w.take();
}

FetchRequestMsg decode_fetch_request_msg(ByteView payload) {
    ByteReader r = open_payload(payload, MsgKind::kFetchRequest);
    FetchRequestMsg m;
    m.car.bytes = r.array<32>();
    return m;
}

Bytes encode_message(const FetchResponseMsg& m) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(MsgKind::kFetchResponse));
    w.raw(encode_car(m.car));
    return w.take();
}

FetchResponseMsg decode_fetch_response_msg(ByteView payload) {
    ByteReader r = open_payload(payload, MsgKind::kFetchResponse);
    return FetchResponseMsg{decode_car(r.rest())};
}

MsgKind peek_kind(ByteView payload) {
    if (payload.empty())
        throw DecodeError("empty payload", 0);
    uint8_t kind = payload[0];
    if (kind < static_cast<uint8_t>(MsgKind::kCar) || kind > static_cast<uint8_t>(MsgKind::kFetchResponse))
        throw DecodeError("unknown message kind", 0);
    return static_cast<MsgKind>(kind);
}

Bytes attestation_tx_bytes(const StateAttestation& attestation, uint64_t chain_id) {
    Transaction tx;
    tx.tx_type = kTxTypeAttestation;
    tx.chain_id = chain_id;
    Digest sender = sha256({ByteView(reinterpret_cast<const uint8_t*>("replica-addr"), 12),
                            ByteView(reinterpret_cast<const uint8_t*>(&attestation.signer), 4)});
    std::copy(sender.bytes.begin(), sender.bytes.begin() + 20, tx.sender.bytes.begin());
    ByteWriter input;
    input.u64(attestation.height);
    input.raw(attestation.commitment.bytes);
    input.u32(attestation.signer);
    input.u32(attestation.sig.signer);
    input.raw(attestation.sig.tag);
    tx.input = input.take();
    return encode_transaction(tx);
}

std::optional<StateAttestation> parse_attestation_tx(const Transaction& tx) {
    if (tx.tx_type != kTxTypeAttestation)
        return std::nullopt;
    try {
        ByteReader r(ByteView(tx.input.data(), tx.input.size()));
        StateAttestation a;
        a.height = r.u64();
        a.commitment.bytes = r.array<32>();
        a.signer = r.u32();
        a.sig.signer = r.u32();
        a.sig.tag = r.array<32>();
        if (!r.eof())
            return std::nullopt;
        return a;
    } catch (const DecodeError&) {
        return std::nullopt;
    }
}

}  // namespace lanebft
