#pragma once

#include "crypto/p256.hpp"
#include "crypto/provider.hpp"

namespace vauth::crypto {

class Es256PublicKey : public PublicKey {
public:
    explicit Es256PublicKey(P256Key key) : key_(std::move(key)) {}

    std::int64_t algorithm() const override;
    cbor::Value cose() const override;
    bool verify(ByteView message, ByteView signature) const override;

    const P256Key& key() const { return key_; }

private:
    P256Key key_;
};

/// Software P-256 key; encoded form is PKCS#8 DER.
class Es256PrivateKey : public PrivateKey {
public:
    explicit Es256PrivateKey(P256Key key) : key_(std::move(key)) {}

    Bytes sign(ByteView message) const override { return key_.sign(message); }
    Bytes encoded() const override { return key_.pkcs8(); }

    const P256Key& key() const { return key_; }

private:
    P256Key key_;
};

class Es256Provider : public CryptoProvider {
public:
    std::int64_t algorithm() const override;
    std::string name() const override { return "es256-software"; }
    KeyPair generate() override;
    KeyPair load(ByteView encoded) override;
    std::shared_ptr<const PublicKey> load_public(const cbor::Value& cose) override;
};

} // namespace vauth::crypto
