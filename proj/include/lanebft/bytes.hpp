// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lanebft {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

/// Unsigned 256-bit integer with modulo-2^256 wrapping arithmetic.
using u256 = boost::multiprecision::uint256_t;

struct Address {
    std::array<uint8_t, 20> bytes{};

    auto operator<=>(const Address&) const = default;
};

struct Bytes32 {
    std::array<uint8_t, 32> bytes{};

    auto operator<=>(const Bytes32&) const = default;

    bool is_zero() const {
        for (auto b : bytes)
            if (b != 0)
                return false;
        return true;
    }
};

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex);  // throws std::invalid_argument on bad input

/// Thrown by forward-only decoders; `offset` is the byte position that
/// could not be satisfied.
class DecodeError : public std::runtime_error {
public:
    DecodeError(std::string msg, size_t offset)
        : std::runtime_error(std::move(msg)), offset_(offset) {}

    size_t offset() const { return offset_; }

private:
    size_t offset_;
};

/// Big-endian byte sink for the project's wire formats.
class ByteWriter {
public:
    void u8(uint8_t v) { out_.push_back(v); }
    void u16(uint16_t v);
    void u32(uint32_t v);
    void u64(uint64_t v);
    void raw(ByteView data) { out_.insert(out_.end(), data.begin(), data.end()); }
    void raw(const Bytes& data) { out_.insert(out_.end(), data.begin(), data.end()); }
    template <size_t N>
    void raw(const std::array<uint8_t, N>& a) { out_.insert(out_.end(), a.begin(), a.end()); }

    size_t size() const { return out_.size(); }
    Bytes take() { return std::move(out_); }
    const Bytes& data() const { return out_; }

private:
    Bytes out_;
};

/// Forward-only big-endian reader. Every read past the end throws
/// DecodeError carrying the current offset; there is no way to seek back.
class ByteReader {
public:
    explicit ByteReader(ByteView data) : data_(data) {}

    uint8_t u8();
    uint16_t u16();
    uint32_t u32();
    uint64_t u64();
    ByteView bytes(size_t n);
    template <size_t N>
    std::array<uint8_t, N> array() {
        auto v = bytes(N);
        std::array<uint8_t, N> out;
        std::copy(v.begin(), v.end(), out.begin());
        return out;
    }

    size_t pos() const { return pos_; }
    size_t remaining() const { return data_.size() - pos_; }
    bool eof() const { return pos_ == data_.size(); }
    ByteView rest();

private:
    void need(size_t n);

    ByteView data_;
    size_t pos_ = 0;
};

Bytes32 u256_to_be32(const u256& v);
u256 u256_from_be(ByteView data);  // data.size() <= 32

/// Minimal big-endian encoding: no leading zero byte; zero encodes as empty.
Bytes u256_minimal_be(const u256& v);

uint64_t u64_from_be(ByteView data);  // data.size() <= 8

}  // namespace lanebft
