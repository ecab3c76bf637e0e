// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <lanebft/bytes.hpp>

#include <initializer_list>

namespace lanebft {

/// Replica index in [0, n).
using ReplicaId = uint32_t;

/// 32-byte SHA-256 output. All digests in wire formats are these raw bytes.
struct Digest {
    std::array<uint8_t, 32> bytes{};

    auto operator<=>(const Digest&) const = default;

    bool is_zero() const {
        for (auto b : bytes)
            if (b != 0)
                return false;
        return true;
    }

    std::string hex() const { return to_hex(ByteView(bytes.data(), bytes.size())); }
};

Digest sha256(ByteView data);
Digest sha256(std::initializer_list<ByteView> parts);

/// Incremental SHA-256, for hashing framed multi-part inputs.
class Hasher {
public:
    Hasher();
    ~Hasher();
    Hasher(const Hasher&) = delete;
    Hasher& operator=(const Hasher&) = delete;

    void update(ByteView data);
    void update_u64(uint64_t v);
    Digest finish();

private:
    void* ctx_;
};

/// Keyed-hash authenticator standing in for a real signature. `tag` binds
/// (signer, message) to the signer's per-run secret; it verifies only
/// through a registry that holds the same secret.
struct Signature {
    ReplicaId signer = 0;
    std::array<uint8_t, 32> tag{};

    auto operator<=>(const Signature&) const = default;
};

/// Holds every replica's signing secret for one run. Secrets are derived
/// from the run seed, so signatures are deterministic and checkable without
/// asymmetric cryptography, and unforgeable within the simulation as long
/// as secrets are only reachable through sign/verify.
class KeyRegistry {
public:
    KeyRegistry(uint64_t run_seed, uint32_t replica_count);

    uint32_t size() const { return static_cast<uint32_t>(secrets_.size()); }

    /// Throws std::out_of_range for an unregistered signer.
    Signature sign(ReplicaId signer, const Digest& msg) const;

    /// False for unknown signers or any tampering of signer, tag or msg.
    bool verify(const Signature& sig, const Digest& msg) const;

private:
    std::array<uint8_t, 32> tag_for(ReplicaId signer, const Digest& msg) const;

    std::vector<std::array<uint8_t, 32>> secrets_;
};

}  // namespace lanebft
