#pragma once

#include <memory>
#include <utility>

#include "common/bytes.hpp"
#include "crypto/primitives.hpp"

typedef struct evp_pkey_st EVP_PKEY;

namespace vauth::crypto {

struct EcPoint {
    Bytes x; // 32 bytes, big-endian
    Bytes y;

    bool operator==(const EcPoint&) const = default;
};

struct RawSignature {
    Bytes r; // 32 bytes each, left-padded
    Bytes s;
};

/// A NIST P-256 key, private or public-only.
class P256Key {
public:
    static P256Key generate();
    static P256Key from_private_scalar(ByteView scalar);
    static P256Key from_pkcs8(ByteView der);
    static P256Key from_public(const EcPoint& point);

    P256Key(const P256Key& other);
    P256Key& operator=(const P256Key& other);
    P256Key(P256Key&&) noexcept = default;
    P256Key& operator=(P256Key&&) noexcept = default;
    ~P256Key();

    bool has_private() const { return has_private_; }

    EcPoint public_point() const;
    Bytes private_scalar() const;
    Bytes pkcs8() const;

    /// ECDSA over SHA-256(message), DER encoded.
    Bytes sign(ByteView message) const;
    /// ECDSA over a caller-supplied digest without re-hashing.
    RawSignature sign_digest(ByteView digest) const;

    bool verify(ByteView message, ByteView der_signature) const;
    bool verify_digest(ByteView digest, ByteView der_signature) const;

    /// x-coordinate of this private key times the peer's public point.
    Bytes ecdh_x(const P256Key& peer) const;

    static bool is_on_curve(ByteView x, ByteView y);

private:
    P256Key(EVP_PKEY* pkey, bool has_private);

    struct Deleter {
        void operator()(EVP_PKEY* p) const;
    };
    std::unique_ptr<EVP_PKEY, Deleter> pkey_;
    bool has_private_ = false;
};

Bytes der_from_raw(const RawSignature& sig);
RawSignature raw_from_der(ByteView der);

} // namespace vauth::crypto
