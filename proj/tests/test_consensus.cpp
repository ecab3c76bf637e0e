// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/consensus.hpp>
#include <lanebft/messages.hpp>

#include <doctest.h>

#include "helpers.hpp"

using namespace lanebft;
using namespace lanebft::test;

namespace {

Car make_car(KeyRegistry& keys, LaneOwner& owner, CarStore& store, int txs, uint32_t salt = 0) {
    std::vector<Bytes> batch;
    for (int i = 0; i < txs; ++i) {
        Transaction tx;
        tx.sender = test_address(salt * 4096 + owner.next_pos() * 31 + i);
        tx.to = test_address(1);
        tx.nonce = 0;
        batch.push_back(encode_transaction(tx));
    }
    (void)keys;
    Car car = owner.propose(batch);
    store.put(car);
    return car;
}

PoACert certify(KeyRegistry& keys, const Digest& digest, std::initializer_list<ReplicaId> signers) {
    PoACert cert;
    cert.car_digest = digest;
    for (ReplicaId r : signers)
        cert.votes.push_back(keys.sign(r, digest));
    return cert;
}

}  // namespace

TEST_CASE("quorum thresholds for n = 3f+1") {
    CHECK(poa_quorum(1) == 2);
    CHECK(qc_quorum(4, 1) == 3);
    CHECK(confirm_quorum(1) == 3);
    CHECK(poa_quorum(2) == 3);
    CHECK(qc_quorum(7, 2) == 5);
    CHECK(confirm_quorum(2) == 5);
}

TEST_CASE("leader selection is a stake-weighted round robin") {
    SUBCASE("equal stakes rotate") {
        std::vector<uint64_t> stakes = {1, 1, 1, 1};
        std::set<ReplicaId> seen;
        for (uint64_t v = 0; v < 4; ++v)
            seen.insert(select_leader(v, stakes));
        CHECK(seen.size() == 4);
    }

    SUBCASE("3:1:1:1 stakes select the heavy replica half the time") {
        std::vector<uint64_t> stakes = {3, 1, 1, 1};
        uint64_t heavy = 0;
        for (uint64_t v = 0; v < 6000; ++v)
            if (select_leader(v, stakes) == 0)
                ++heavy;
        CHECK(heavy == 3000);  // exact for the documented formula
    }

    SUBCASE("single staked replica always leads") {
        std::vector<uint64_t> stakes = {0, 5, 0, 0};
        for (uint64_t v = 0; v < 20; ++v)
            CHECK(select_leader(v, stakes) == 1);
    }

    SUBCASE("zero total stake is rejected") {
        std::vector<uint64_t> stakes = {0, 0};
        CHECK_THROWS_AS((void)select_leader(0, stakes), std::invalid_argument);
    }
}

TEST_CASE("tip cut encoding round trips, and re-stamping does not change digests") {
    KeyRegistry keys(3, 4);
    TipCut cut;
    cut.slot = 5;
    cut.tips.resize(4);
    Digest car = sha256({});
    cut.tips[1] = TipEntry{true, 9, car, certify(keys, car, {1, 2})};
    StateQuorumRecord record;
    record.height = 3;
    record.commitment = test_slot_key(1);
    record.sigs = {keys.sign(0, attestation_digest(3, record.commitment)),
                   keys.sign(1, attestation_digest(3, record.commitment)),
                   keys.sign(2, attestation_digest(3, record.commitment))};
    record.committed_at = 6;
    cut.records = {record};

    Bytes encoded = encode_tip_cut(cut);
    TipCut back = decode_tip_cut(ByteView(encoded.data(), encoded.size()));
    CHECK(back == cut);
    CHECK(cut_digest(back) == cut_digest(cut));
}

TEST_CASE("tip monotonicity across cuts") {
    TipCut prev, next;
    prev.tips.resize(3);
    next.tips.resize(3);
    prev.tips[0] = TipEntry{true, 4, sha256({}), {}};

    SUBCASE("same or higher pos is fine") {
        next.tips[0] = TipEntry{true, 4, sha256({}), {}};
        CHECK(tips_monotone(prev, next));
        next.tips[0].pos = 9;
        CHECK(tips_monotone(prev, next));
    }

    SUBCASE("lower pos regresses") {
        next.tips[0] = TipEntry{true, 3, sha256({}), {}};
        CHECK(!tips_monotone(prev, next));
    }

    SUBCASE("dropping a known lane regresses") {
        CHECK(!tips_monotone(prev, next));
    }

    SUBCASE("filling a previously empty lane is fine") {
        next.tips[0] = prev.tips[0];
        next.tips[2] = TipEntry{true, 0, sha256({}), {}};
        CHECK(tips_monotone(prev, next));
    }
}

TEST_CASE("quorum certs require n-f distinct verified signers") {
    KeyRegistry keys(3, 4);
    TipCut cut;
    cut.slot = 1;
    cut.tips.resize(4);
    Digest digest = cut_digest(cut);
    Digest msg = phase_vote_digest(Phase::kPrepare, 1, 0, digest);

    QuorumCert qc;
    qc.phase = Phase::kPrepare;
    qc.slot = 1;
    qc.view = 0;
    qc.cut = digest;
    qc.votes = {keys.sign(0, msg), keys.sign(1, msg)};
    CHECK(!qc.valid(keys, 4, 1));  // 2 < 3

    qc.votes.push_back(keys.sign(2, msg));
    CHECK(qc.valid(keys, 4, 1));

    SUBCASE("duplicate signers do not count twice") {
        qc.votes = {keys.sign(0, msg), keys.sign(0, msg), keys.sign(1, msg)};
        CHECK(!qc.valid(keys, 4, 1));
    }

    SUBCASE("a vote for another phase fails verification") {
        qc.votes[2] = keys.sign(2, phase_vote_digest(Phase::kCommit, 1, 0, digest));
        CHECK(!qc.valid(keys, 4, 1));
    }

    SUBCASE("signer bitmap names the voters") {
        CHECK(qc.signer_bitmap() == 0b0111);
    }
}

TEST_CASE("timeout certs carry valid prepare evidence") {
    KeyRegistry keys(3, 4);
    TipCut cut;
    cut.slot = 2;
    cut.tips.resize(4);
    Digest digest = cut_digest(cut);

    QuorumCert prepare;
    prepare.phase = Phase::kPrepare;
    prepare.slot = 2;
    prepare.view = 0;
    prepare.cut = digest;
    Digest pmsg = phase_vote_digest(Phase::kPrepare, 2, 0, digest);
    prepare.votes = {keys.sign(0, pmsg), keys.sign(1, pmsg), keys.sign(2, pmsg)};

    TimeoutCert tc;
    tc.slot = 2;
    tc.view = 0;
    Digest tmsg = timeout_vote_digest(2, 0);
    tc.votes = {keys.sign(0, tmsg), keys.sign(1, tmsg), keys.sign(3, tmsg)};
    tc.high_prepare = prepare;
    tc.high_prepare_cut = cut;
    CHECK(tc.valid(keys, 4, 1));

    SUBCASE("missing cut body invalidates the evidence") {
        tc.high_prepare_cut.reset();
        CHECK(!tc.valid(keys, 4, 1));
    }

    SUBCASE("cut mismatch invalidates the evidence") {
        TipCut other = cut;
        other.slot = 3;
        tc.high_prepare_cut = other;
        CHECK(!tc.valid(keys, 4, 1));
    }

    SUBCASE("too few timeout votes") {
        tc.votes.pop_back();
        CHECK(!tc.valid(keys, 4, 1));
    }
}

TEST_CASE("linearization orders cars by lane then pos and dedups by digest") {
    KeyRegistry keys(3, 4);
    CarStore store;
    LaneOwner lane0(0, &keys, 1);
    LaneOwner lane1(1, &keys, 1);

    Car a0 = make_car(keys, lane0, store, 2, 0);
    Car a1 = make_car(keys, lane0, store, 1, 0);
    Car b0 = make_car(keys, lane1, store, 1, 1);

    TipCut cut;
    cut.slot = 0;
    cut.tips.resize(4);
    cut.tips[0] = TipEntry{true, 1, car_digest(a1), certify(keys, car_digest(a1), {0, 2})};
    cut.tips[1] = TipEntry{true, 0, car_digest(b0), certify(keys, car_digest(b0), {1, 2})};

    Linearizer lin(4);
    CHECK(lin.missing_cars(cut, store).empty());
    Block block = lin.expand(cut, store, 1);
    CHECK(block.cars == 3);
    CHECK(block.txs.size() == 4);
    CHECK(lin.committed_pos()[0] == 1);
    CHECK(lin.committed_pos()[1] == 0);

    // Lane 0's cars come first (2 txs then 1), lane 1's afterwards.
    CHECK(block.txs[0] == decode_transaction(ByteView(a0.batch[0].data(), a0.batch[0].size())));
    CHECK(block.txs[2] == decode_transaction(ByteView(a1.batch[0].data(), a1.batch[0].size())));
    CHECK(block.txs[3] == decode_transaction(ByteView(b0.batch[0].data(), b0.batch[0].size())));

    SUBCASE("a cut advancing nothing yields an empty block") {
        TipCut same = cut;
        Block empty = lin.expand(same, store, 2);
        CHECK(empty.txs.empty());
        CHECK(empty.cars == 0);
    }
}

TEST_CASE("the same transaction in two lanes executes once") {
    KeyRegistry keys(3, 4);
    CarStore store;
    LaneOwner lane0(0, &keys, 1);
    LaneOwner lane2(2, &keys, 1);

    Transaction tx;
    tx.sender = test_address(1);
    tx.to = test_address(2);
    tx.nonce = 0;
    Bytes bytes = encode_transaction(tx);

    Car a = lane0.propose({bytes});
    Car b = lane2.propose({bytes});
    store.put(a);
    store.put(b);

    TipCut cut;
    cut.slot = 0;
    cut.tips.resize(4);
    cut.tips[0] = TipEntry{true, 0, car_digest(a), certify(keys, car_digest(a), {0, 1})};
    cut.tips[2] = TipEntry{true, 0, car_digest(b), certify(keys, car_digest(b), {2, 1})};

    Linearizer lin(4);
    Block block = lin.expand(cut, store, 1);
    CHECK(block.txs.size() == 1);
    CHECK(block.duplicates_skipped == 1);
}

TEST_CASE("undecodable transactions are skipped deterministically") {
    KeyRegistry keys(3, 4);
    CarStore store;
    LaneOwner lane0(0, &keys, 1);
    Car car = lane0.propose({Bytes{0xff}});
    store.put(car);

    TipCut cut;
    cut.slot = 0;
    cut.tips.resize(4);
    cut.tips[0] = TipEntry{true, 0, car_digest(car), certify(keys, car_digest(car), {0, 1})};

    Linearizer lin(4);
    Block block = lin.expand(cut, store, 1);
    CHECK(block.txs.empty());
    CHECK(block.malformed_skipped == 1);
}

TEST_CASE("missing cars walk parent references as far as possible") {
    KeyRegistry keys(3, 4);
    CarStore store;
    LaneOwner lane0(0, &keys, 1);
    Car c0 = make_car(keys, lane0, store, 1);
    Car c1 = make_car(keys, lane0, store, 1);
    Car c2 = make_car(keys, lane0, store, 1);

    TipCut cut;
    cut.slot = 0;
    cut.tips.resize(4);
    cut.tips[0] = TipEntry{true, 2, car_digest(c2), certify(keys, car_digest(c2), {0, 1})};

    SUBCASE("everything present: nothing missing") {
        Linearizer lin(4);
        CHECK(lin.missing_cars(cut, store).empty());
    }

    SUBCASE("a hole is reported at the first unknown digest") {
        CarStore partial;
        partial.put(c2);
        Linearizer lin(4);
        auto missing = lin.missing_cars(cut, partial);
        REQUIRE(missing.size() == 1);
        CHECK(missing[0].first == 0);
        CHECK(missing[0].second == car_digest(c1));
    }

    SUBCASE("tip itself unknown") {
        CarStore empty;
        Linearizer lin(4);
        auto missing = lin.missing_cars(cut, empty);
        REQUIRE(missing.size() == 1);
        CHECK(missing[0].second == car_digest(c2));
    }
}

TEST_CASE("message codecs round trip") {
    KeyRegistry keys(3, 4);
    Digest digest = sha256({});

    CarVoteMsg vote{2, 9, digest, keys.sign(1, digest)};
    Bytes p1 = encode_message(vote);
    CHECK(peek_kind(ByteView(p1.data(), p1.size())) == MsgKind::kCarVote);
    CarVoteMsg vote_back = decode_car_vote_msg(ByteView(p1.data(), p1.size()));
    CHECK(vote_back.lane == 2);
    CHECK(vote_back.pos == 9);
    CHECK(vote_back.vote == vote.vote);

    TipCut cut;
    cut.slot = 4;
    cut.tips.resize(4);
    CutProposalMsg proposal;
    proposal.view = 1;
    proposal.proposer = 3;
    proposal.cut = cut;
    TimeoutCert tc;
    tc.slot = 4;
    tc.view = 0;
    Digest tmsg = timeout_vote_digest(4, 0);
    tc.votes = {keys.sign(0, tmsg), keys.sign(1, tmsg), keys.sign(2, tmsg)};
    proposal.justify = tc;
    Bytes p2 = encode_message(proposal);
    CutProposalMsg proposal_back = decode_cut_proposal_msg(ByteView(p2.data(), p2.size()));
    CHECK(proposal_back.view == 1);
    CHECK(proposal_back.proposer == 3);
    CHECK(proposal_back.cut == cut);
    REQUIRE(proposal_back.justify.has_value());
    CHECK(proposal_back.justify->votes.size() == 3);

    PhaseVoteMsg phase{Phase::kCommit, 4, 1, digest, keys.sign(2, phase_vote_digest(Phase::kCommit, 4, 1, digest))};
    Bytes p3 = encode_message(phase);
    PhaseVoteMsg phase_back = decode_phase_vote_msg(ByteView(p3.data(), p3.size()));
    CHECK(phase_back.phase == Phase::kCommit);
    CHECK(phase_back.vote == phase.vote);

    FetchRequestMsg fetch{digest};
    Bytes p4 = encode_message(fetch);
    CHECK(decode_fetch_request_msg(ByteView(p4.data(), p4.size())).car == digest);
}

TEST_CASE("attestations survive the system-transaction carrier") {
    KeyRegistry keys(3, 4);
    StateAttestation a = make_attestation(keys, 2, 17, test_slot_key(5));
    Bytes bytes = attestation_tx_bytes(a, 7);
    Transaction tx = decode_transaction(ByteView(bytes.data(), bytes.size()));
    CHECK(tx.tx_type == kTxTypeAttestation);
    auto parsed = parse_attestation_tx(tx);
    REQUIRE(parsed.has_value());
    CHECK(*parsed == a);
    CHECK(verify_attestation(keys, *parsed));

    SUBCASE("user transactions do not parse as attestations") {
        Transaction user;
        user.sender = test_address(0);
        CHECK(!parse_attestation_tx(user).has_value());
    }
}

TEST_CASE("commit cert validity: all votes, or n-f votes plus confirms") {
    KeyRegistry keys(3, 4);
    TipCut cut;
    cut.slot = 1;
    cut.tips.resize(4);
    Digest digest = cut_digest(cut);
    Digest cmsg = phase_vote_digest(Phase::kCommit, 1, 0, digest);
    Digest amsg = phase_vote_digest(Phase::kConfirm, 1, 0, digest);

    QuorumCert qc;
    qc.phase = Phase::kCommit;
    qc.slot = 1;
    qc.view = 0;
    qc.cut = digest;

    SUBCASE("full commit votes need no confirms") {
        for (ReplicaId r = 0; r < 4; ++r)
            qc.votes.push_back(keys.sign(r, cmsg));
        CommitCertMsg cert{qc, {}};
        CHECK(cert.valid(keys, 4, 1));
    }

    SUBCASE("n-f commit votes need 2f+1 confirms") {
        for (ReplicaId r = 0; r < 3; ++r)
            qc.votes.push_back(keys.sign(r, cmsg));
        CommitCertMsg cert{qc, {}};
        CHECK(!cert.valid(keys, 4, 1));
        cert.confirms = {keys.sign(0, amsg), keys.sign(1, amsg)};
        CHECK(!cert.valid(keys, 4, 1));
        cert.confirms.push_back(keys.sign(3, amsg));
        CHECK(cert.valid(keys, 4, 1));
    }
}
