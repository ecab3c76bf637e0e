// lanebft: deterministic multi-lane BFT ledger simulator
// Copyright 2026 The lanebft Authors.
// SPDX-License-Identifier: Apache-2.0

#include <lanebft/crypto.hpp>

#include <openssl/evp.h>

#include <cstring>
#include <stdexcept>

namespace lanebft {

Digest sha256(ByteView data) {
    Digest out;
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), out.bytes.data(), &len, EVP_sha256(), nullptr);
    return out;
}

Digest sha256(std::initializer_list<ByteView> parts) {
    Hasher h;
    for (auto p : parts)
        h.update(p);
    return h.finish();
}

Hasher::Hasher() {
    auto* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    ctx_ = ctx;
}

Hasher::~Hasher() {
    EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
}

void Hasher::update(ByteView data) {
    EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size());
}

void Hasher::update_u64(uint64_t v) {
    uint8_t be[8];
    for (int i = 0; i < 8; ++i)
        be[i] = static_cast<uint8_t>(v >> ( 56 - 8 * i));
    update(ByteView(be, 8));
}

Digest Hasher::finish() {
    Digest out;
    unsigned int len = 0;
    EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.bytes.data(), &len);
    return out;
}

KeyRegistry::KeyRegistry(uint64_t run_seed, uint32_t replica_count) {
    secrets_.reserve(replica_count);
    for (uint32_t r = 0; r < replica_count; ++r) {
        Hasher h;
        h.update(ByteView(reinterpret_cast<const uint8_t*>("replica-secret"), 14));
        h.update_u64(run_seed);
        h.update_u64(r);
        secrets_.push_back(h.finish().bytes);
    }
}

std::array<uint8_t, 32> KeyRegistry::tag_for(ReplicaId signer, const Digest& msg) const {
    Hasher h;
    h.update(ByteView(reinterpret_cast<const uint8_t*>("sig"), 3));
    h.update(ByteView(secrets_[signer].data(), 32));
    h.update_u64(signer);
    h.update(ByteView(msg.bytes.data(), 32));
    return h.finish().bytes;
}

Signature KeyRegistry::sign(ReplicaId signer, const Digest& msg) const {
    if (signer >= secrets_.size())
        throw std::out_of_range("sign: unknown signer");
    return Signature{signer, tag_for(signer, msg)};
}

bool KeyRegistry::verify(const Signature& sig, const Digest& msg) const {
    if (sig.signer >= secrets_.size())
        return false;
    return sig.tag == tag_for(sig.signer, msg);
}

}  // namespace lanebft
