// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/tx.hpp>

#include <doctest.h>

#include "helpers.hpp"

using namespace lanebft;
using namespace lanebft::test;

namespace {

Transaction sample_tx() {
    Transaction tx;
    tx.tx_type = 0;
    tx.chain_id = 7;
    tx.sender = test_address(1);
    tx.to = test_address(2);
    tx.value = 1000;
    tx.nonce = 3;
    tx.gas_limit = 21000;
    tx.gas_price = 5;
    AccessListEntry entry;
    entry.address = test_address(3);
    entry.storage_keys = {test_slot_key(1), test_slot_key(2)};
    tx.access_list = {entry};
    tx.signature.fill(0xab);
    tx.input = {0xde, 0xad};
    return tx;
}

}  // namespace

TEST_CASE("zero value encodes as a single zero length byte") {
    Transaction tx = sample_tx();
    tx.value = 0;
    Bytes encoded = encode_transaction(tx);
    // tx_type(1) + chain_id(8) + sender(20) + marker(1) + to(20) = offset 50
    CHECK(encoded[50] == 0x00);
    // nonce follows immediately
    CHECK(u64_from_be(ByteView(encoded.data() + 51, 8)) == tx.nonce);
}

TEST_CASE("contract creation marker sits at offset 29 with no address after") {
    Transaction tx = sample_tx();
    tx.to = std::nullopt;
    Bytes encoded = encode_transaction(tx);
    CHECK(encoded[29] == 0x00);
    // value length byte follows the marker directly
    CHECK(encoded[30] == 2);  // value 1000 = 0x03e8
    CHECK(encoded[31] == 0x03);
    CHECK(encoded[32] == 0xe8);
    Transaction back = decode_transaction(ByteView(encoded.data(), encoded.size()));
    CHECK(!back.to.has_value());
    CHECK(back == tx);
}

TEST_CASE("access list entries round nested counts") {
    Transaction tx = sample_tx();
    Bytes encoded = encode_transaction(tx);
    Transaction back = decode_transaction(ByteView(encoded.data(), encoded.size()));
    REQUIRE(back.access_list.size() == 1);
    CHECK(back.access_list[0].storage_keys.size() == 2);
    CHECK(back == tx);
}

TEST_CASE("payload ending exactly after access list leaves empty input") {
    Transaction tx = sample_tx();
    tx.input.clear();
    Bytes encoded = encode_transaction(tx);
    Transaction back = decode_transaction(ByteView(encoded.data(), encoded.size()));
    CHECK(back.input.empty());
    CHECK(back == tx);
}

TEST_CASE("round trip over 10000 random transactions") {
    TxGen gen(2024);
    for (int i = 0; i < 10000; ++i) {
        Transaction tx = gen.random_tx();
        Bytes encoded = encode_transaction(tx);
        Transaction back = decode_transaction(ByteView(encoded.data(), encoded.size()));
        REQUIRE(back == tx);
        // canonicality: re-encoding reproduces the input bytes
        REQUIRE(encode_transaction(back) == encoded);
        REQUIRE(tx_digest(back) == tx_digest(tx));
    }
}

TEST_CASE("digest changes when any input byte flips") {
    Transaction tx = sample_tx();
    Digest base = tx_digest(tx);
    Transaction flipped = tx;
    flipped.input[0] ^= 1;
    CHECK(tx_digest(flipped) != base);
}

TEST_CASE("truncation fails cleanly or yields a shorter canonical tx") {
    TxGen gen(55);
    for (int t = 0; t < 50; ++t) {
        Transaction tx = gen.random_tx();
        Bytes encoded = encode_transaction(tx);
        size_t input_start = encoded.size() - tx.input.size();
        for (size_t cut = 0; cut < encoded.size(); ++cut) {
            ByteView prefix(encoded.data(), cut);
            if (cut < input_start) {
                // Inside the fixed fields or access list: must fail with an
                // offset, never succeed.
                REQUIRE_THROWS_AS((void)decode_transaction(prefix), DecodeError);
            } else {
                // Inside the input region: decodes to the same tx with a
                // shorter input, still canonical.
                Transaction back = decode_transaction(prefix);
                REQUIRE(back.input.size() == cut - input_start);
                Bytes re = encode_transaction(back);
                REQUIRE(re == Bytes(prefix.begin(), prefix.end()));
            }
        }
    }
}

TEST_CASE("decode errors carry the failing offset") {
    Transaction tx = sample_tx();
    Bytes encoded = encode_transaction(tx);
    // truncate in the middle of the signature field
    size_t sig_start = 53 + 16;  // fixed fields + value(3) + nonce/gas(16) + price(2)
    ByteView prefix(encoded.data(), sig_start + 10);
    try {
        (void)decode_transaction(prefix);
        FAIL("expected DecodeError");
    } catch (const DecodeError& e) {
        CHECK(e.offset() <= prefix.size());
        CHECK(e.offset() > 0);
    }
}

TEST_CASE("non-minimal integers are rejected") {
    Transaction tx = sample_tx();
    tx.access_list.clear();
    tx.input.clear();
    tx.value = 1000;
    Bytes encoded = encode_transaction(tx);
    // value field: length byte at 50, payload 0x03 0xe8. Widen to a
    // leading-zero form: 03 00 03 e8.
    Bytes padded(encoded.begin(), encoded.begin() + 50);
    padded.push_back(3);
    padded.push_back(0x00);
    padded.push_back(0x03);
    padded.push_back(0xe8);
    padded.insert(padded.end(), encoded.begin() + 53, encoded.end());
    CHECK_THROWS_AS((void)decode_transaction(ByteView(padded.data(), padded.size())), DecodeError);

    // zero written as L=1, 0x00 instead of L=0
    Transaction zero = tx;
    zero.value = 0;
    Bytes zenc = encode_transaction(zero);
    Bytes zpad(zenc.begin(), zenc.begin() + 50);
    zpad.push_back(1);
    zpad.push_back(0x00);
    zpad.insert(zpad.end(), zenc.begin() + 51, zenc.end());
    CHECK_THROWS_AS((void)decode_transaction(ByteView(zpad.data(), zpad.size())), DecodeError);
}

TEST_CASE("bad to_marker and overlong length prefix are rejected") {
    Transaction tx = sample_tx();
    Bytes encoded = encode_transaction(tx);
    Bytes bad = encoded;
    bad[29] = 0x02;
    CHECK_THROWS_AS((void)decode_transaction(ByteView(bad.data(), bad.size())), DecodeError);

    Bytes overlong = encoded;
    overlong[50] = 33;  // value length prefix > 32
    CHECK_THROWS_AS((void)decode_transaction(ByteView(overlong.data(), overlong.size())), DecodeError);
}

TEST_CASE("decoder consumes the payload in a single forward pass") {
    Transaction tx = sample_tx();
    Bytes encoded = encode_transaction(tx);
    // ByteReader has no rewind; full consumption means each byte was
    // visited exactly once.
    ByteReader r(ByteView(encoded.data(), encoded.size()));
    (void)decode_transaction(ByteView(encoded.data(), encoded.size()));
    CHECK(encode_transaction(decode_transaction(ByteView(encoded.data(), encoded.size()))) == encoded);
}

#ifndef LANEBFT_VECTORS_DIR
#define LANEBFT_VECTORS_DIR "tests/vectors"
#endif

#include <lanebft/scenario.hpp>

#include <json.hpp>

#include <fstream>

TEST_CASE("shipped test vectors decode and re-encode bit-exactly") {
    std::ifstream in(std::string(LANEBFT_VECTORS_DIR) + "/tx_vectors.json");
    REQUIRE(in.good());
    nlohmann::json doc = nlohmann::json::parse(in);
    REQUIRE(doc.size() >= 6);
    for (const auto& vector : doc) {
        INFO(vector.at("name").get<std::string>());
        Bytes payload = from_hex(vector.at("hex").get<std::string>());
        Transaction from_fields = transaction_from_json(vector.at("fields").dump());
        Transaction from_hex_tx = decode_transaction(ByteView(payload.data(), payload.size()));
        CHECK(from_hex_tx == from_fields);
        CHECK(encode_transaction(from_fields) == payload);
    }
}
