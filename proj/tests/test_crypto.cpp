// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/crypto.hpp>

#include <doctest.h>

#include <random>

using namespace lanebft;

TEST_CASE("digest is deterministic and 32 bytes") {
    Bytes a = {1, 2, 3};
    CHECK(sha256(ByteView(a.data(), a.size())) == sha256(ByteView(a.data(), a.size())));
    CHECK(sha256(ByteView(a.data(), a.size())).bytes.size() == 32);
}

TEST_CASE("distinct inputs give distinct digests") {
    Bytes empty;
    Bytes one = {'a'};
    CHECK(sha256(ByteView(empty.data(), 0)) != sha256(ByteView(one.data(), 1)));
}

TEST_CASE("digest of a 1 MiB batch") {
    Bytes big(1 << 20);
    std::mt19937_64 rng(42);
    for (auto& b : big)
        b = static_cast<uint8_t>(rng());
    Digest d = sha256(ByteView(big.data(), big.size()));
    CHECK(!d.is_zero());
    CHECK(d == sha256(ByteView(big.data(), big.size())));
}

TEST_CASE("no collisions over a generated corpus") {
    std::set<Digest> seen;
    std::mt19937_64 rng(7);
    for (int i = 0; i < 5000; ++i) {
        Bytes data(rng() % 64);
        for (auto& b : data)
            b = static_cast<uint8_t>(rng());
        data.push_back(static_cast<uint8_t>(i));
        data.push_back(static_cast<uint8_t>(i >> 8));
        seen.insert(sha256(ByteView(data.data(), data.size())));
    }
    CHECK(seen.size() == 5000);
}

TEST_CASE("sign/verify round trip and tampering") {
    KeyRegistry keys(1234, 4);
    Digest m = sha256({});
    Signature sig = keys.sign(0, m);
    CHECK(keys.verify(sig, m));

    Digest other = sha256(ByteView(m.bytes.data(), 1));
    CHECK(!keys.verify(sig, other));

    Signature forged = sig;
    forged.signer = 2;
    CHECK(!keys.verify(forged, m));

    Signature bent = sig;
    bent.tag[0] ^= 1;
    CHECK(!keys.verify(bent, m));
}

TEST_CASE("unknown signer is rejected") {
    KeyRegistry keys(1, 4);
    Digest m = sha256({});
    CHECK_THROWS_AS((void)keys.sign(9, m), std::out_of_range);
    Signature sig = keys.sign(1, m);
    sig.signer = 9;
    CHECK(!keys.verify(sig, m));
}

TEST_CASE("signatures verify across all replicas and messages") {
    KeyRegistry keys(99, 7);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        ReplicaId r = rng() % 7;
        Bytes data(16);
        for (auto& b : data)
            b = static_cast<uint8_t>(rng());
        Digest m = sha256(ByteView(data.data(), data.size()));
        Signature sig = keys.sign(r, m);
        CHECK(keys.verify(sig, m));
        ReplicaId other = (r + 1 + rng() % 6) % 7;
        Signature wrong = keys.sign(other, m);
        wrong.signer = r;
        CHECK(!keys.verify(wrong, m));
    }
}
