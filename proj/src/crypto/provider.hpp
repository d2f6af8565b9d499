#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cbor/cbor.hpp"
#include "common/bytes.hpp"
#include "crypto/primitives.hpp"

namespace vauth::crypto {

class UnsupportedAlgorithm : public CryptoError {
public:
    explicit UnsupportedAlgorithm(std::int64_t alg)
        : CryptoError("no crypto provider registered for COSE algorithm " + std::to_string(alg)), alg_(alg)
    {
    }
    std::int64_t algorithm() const noexcept { return alg_; }

private:
    std::int64_t alg_;
};

class PublicKey {
public:
    virtual ~PublicKey() = default;
    virtual std::int64_t algorithm() const = 0;
    virtual cbor::Value cose() const = 0;
    virtual bool verify(ByteView message, ByteView signature) const = 0;
};

class PrivateKey {
public:
    virtual ~PrivateKey() = default;
    /// Signature over `message` in the wire format for this algorithm (DER for ES256).
    virtual Bytes sign(ByteView message) const = 0;
    /// Provider-specific serialization, accepted by CryptoProvider::load.
    virtual Bytes encoded() const = 0;
};

struct KeyPair {
    std::shared_ptr<const PublicKey> public_key;
    std::shared_ptr<const PrivateKey> private_key;
};

class CryptoProvider {
public:
    virtual ~CryptoProvider() = default;
    virtual std::int64_t algorithm() const = 0;
    virtual std::string name() const = 0;
    virtual KeyPair generate() = 0;
    /// Throws CryptoError for corrupt or foreign encodings.
    virtual KeyPair load(ByteView encoded) = 0;
    virtual std::shared_ptr<const PublicKey> load_public(const cbor::Value& cose) = 0;
};

/// Providers indexed by COSE algorithm id, one per id.
class ProviderRegistry {
public:
    /// Throws CryptoError when the algorithm already has a provider.
    void add(std::shared_ptr<CryptoProvider> provider);

    CryptoProvider* find(std::int64_t alg) const;
    CryptoProvider& require(std::int64_t alg) const;

    /// Registration order.
    std::vector<std::int64_t> algorithms() const { return order_; }

private:
    std::map<std::int64_t, std::shared_ptr<CryptoProvider>> providers_;
    std::vector<std::int64_t> order_;
};

} // namespace vauth::crypto
