// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lanebft/consensus.hpp>

namespace lanebft {

enum class MsgKind : uint8_t {
    kCar = 1,
    kCarVote = 2,
    kPoA = 3,
    kCutProposal = 4,
    kPhaseVote = 5,    // prepare / commit / confirm, see Phase
    kQcRelay = 6,      // leader-relayed QCs when pipelining is off
    kCommitCert = 7,   // leader-announced final commit when pipelining is off
    kTimeoutVote = 8,
    kTimeoutCert = 9,
    kFetchRequest = 10,
    kFetchResponse = 11,
};

const char* msg_kind_name(MsgKind kind);

struct CarMsg {
    Car car;
};

struct CarVoteMsg {
    ReplicaId lane = 0;
    uint64_t pos = 0;
    Digest car;
    Signature vote;
};

struct PoAMsg {
    ReplicaId lane = 0;
    uint64_t pos = 0;
    PoACert cert;
};

struct CutProposalMsg {
    uint64_t view = 0;
    ReplicaId proposer = 0;
    TipCut cut;
    /// PrepareQC for slot-1 justifying this slot's activation (absent for
    /// the first slot). Voting on slot s requires it, which keeps committed
    /// tips monotone across slots even under view changes.
    std::optional<QuorumCert> prev_prepare;
    std::optional<TipCut> prev_cut;
    /// Justifies proposing in view > 0.
    std::optional<TimeoutCert> justify;
};

struct PhaseVoteMsg {
    Phase phase = Phase::kPrepare;
    uint64_t slot = 0;
    uint64_t view = 0;
    Digest cut;
    Signature vote;
};

struct QcRelayMsg {
    QuorumCert qc;
    bool needs_confirm = false;  // commit QC formed from exactly n-f votes
};

struct CommitCertMsg {
    QuorumCert commit_qc;
    std::vector<Signature> confirms;  // empty when commit_qc has all n votes

    bool valid(const KeyRegistry& keys, uint32_t n, uint32_t f) const;
};

struct TimeoutVoteMsg {
    uint64_t slot = 0;
    uint64_t view = 0;
    Signature vote;
    std::optional<QuorumCert> high_prepare;
    std::optional<TipCut> high_prepare_cut;
};

struct TimeoutCertMsg {
    TimeoutCert cert;
};

struct FetchRequestMsg {
    Digest car;
};

struct FetchResponseMsg {
    Car car;
};

Bytes encode_message(const CarMsg&);
Bytes encode_message(const CarVoteMsg&);
Bytes encode_message(const PoAMsg&);
Bytes encode_message(const CutProposalMsg&);
Bytes encode_message(const PhaseVoteMsg&);
Bytes encode_message(const QcRelayMsg&);
Bytes encode_message(const CommitCertMsg&);
Bytes encode_message(const TimeoutVoteMsg&);
Bytes encode_message(const TimeoutCertMsg&);
Bytes encode_message(const FetchRequestMsg&);
Bytes encode_message(const FetchResponseMsg&);

MsgKind peek_kind(ByteView payload);

CarMsg decode_car_msg(ByteView payload);
CarVoteMsg decode_car_vote_msg(ByteView payload);
PoAMsg decode_poa_msg(ByteView payload);
CutProposalMsg decode_cut_proposal_msg(ByteView payload);
PhaseVoteMsg decode_phase_vote_msg(ByteView payload);
QcRelayMsg decode_qc_relay_msg(ByteView payload);
CommitCertMsg decode_commit_cert_msg(ByteView payload);
TimeoutVoteMsg decode_timeout_vote_msg(ByteView payload);
TimeoutCertMsg decode_timeout_cert_msg(ByteView payload);
FetchRequestMsg decode_fetch_request_msg(ByteView payload);
FetchResponseMsg decode_fetch_response_msg(ByteView payload);

// Attestations travel as system transactions in the proposer's own lane.
Bytes attestation_tx_bytes(const StateAttestation& attestation, uint64_t chain_id);
std::optional<StateAttestation> parse_attestation_tx(const Transaction& tx);

}  // namespace lanebft
