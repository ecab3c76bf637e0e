// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/bytes.hpp>

namespace lanebft {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_nibble(char c) {
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}
}  // namespace

std::string to_hex(ByteView data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0xf]);
    }
    return out;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X'))
        hex.remove_prefix(2);
    if (hex.size() % 2 != 0)
        throw std::invalid_argument("hex string has odd length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_nibble(hex[i]);
        int lo = hex_nibble(hex[i + 1]);
        if (hi < 0 || lo < 0)
            throw std::invalid_argument("invalid hex digit");
        out.push_back(static_cast<uint8_t>(hi << 4 | lo));
    }
    return out;
}

void ByteWriter::u16(uint16_t v) {
    out_.push_back(static_cast<uint8_t>(v >> 8));
    out_.push_back(static_cast<uint8_t>(v));
}

void ByteWriter::u32(uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8)
        out_.push_back(static_cast<uint8_t>(v >> shift));
}

void ByteWriter::u64(uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        out_.push_back(static_cast<uint8_t>(v >> shift));
}

void ByteReader::need(size_t n) {
    if (data_.size() - pos_ < n)
        throw DecodeError("unexpected end of input", pos_);
}

uint8_t ByteReader::u8() {
    need(1);
    return data_[pos_++];
}

uint16_t ByteReader::u16() {
    need(2);
    uint16_t v = static_cast<uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
    pos_ += 2;
    return v;
}

uint32_t ByteReader::u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v = v << 8 | data_[pos_ + i];
    pos_ += 4;
    return v;
}

uint64_t ByteReader::u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v = v << 8 | data_[pos_ + i];
    pos_ += 8;
    return v;
}

ByteView ByteReader::bytes(size_t n) {
    need(n);
    ByteView v = data_.subspan(pos_, n);
    pos_ += n;
    return v;
}

ByteView ByteReader::rest() {
    ByteView v = data_.subspan(pos_);
    pos_ = data_.size();
    return v;
}

Bytes32 u256_to_be32(const u256& v) {
    Bytes raw;
    export_bits(v, std::back_inserter(raw), 8);
    Bytes32 out;
    // export_bits emits a single 0x00 for zero; either way raw fits in 32.
    std::copy(raw.begin(), raw.end(), out.bytes.begin() + (32 - raw.size()));
    return out;
}

u256 u256_from_be(ByteView data) {
    u256 v = 0;
    for (auto b : data)
        v = (v << 8) | b;
    return v;
}

Bytes u256_minimal_be(const u256& v) {
    if (v == 0)
        return {};
    Bytes raw;
    export_bits(v, std::back_inserter(raw), 8);
    return raw;
}

uint64_t u64_from_be(ByteView data) {
    uint64_t v = 0;
    for (auto b : data)
        v = v << 8 | b;
    return v;
}

}  // namespace lanebft
