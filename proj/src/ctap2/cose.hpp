#pragma once

#include <cstdint>

#include "cbor/cbor.hpp"
#include "common/bytes.hpp"

namespace vauth::ctap2 {

namespace cose_alg {
constexpr std::int64_t es256 = -7;
constexpr std::int64_t eddsa = -8;
constexpr std::int64_t ecdh_es_hkdf_256 = -25;
constexpr std::int64_t es256k = -47;
} // namespace cose_alg

constexpr std::int64_t kCoseKtyEc2 = 2;
constexpr std::int64_t kCoseCrvP256 = 1;

/// EC2 public key on P-256.
struct CoseEc2Key {
    std::int64_t alg = cose_alg::es256;
    Bytes x;
    Bytes y;

    bool operator==(const CoseEc2Key&) const = default;
};

cbor::Value cose_ec2_encode(const CoseEc2Key& key);

/// Wrong kty/crv/alg raises unsupported_algorithm; bad coordinate sizes,
/// missing fields and off-curve points raise invalid_parameter.
CoseEc2Key cose_ec2_decode(const cbor::Value& cose_map);

} // namespace vauth::ctap2
