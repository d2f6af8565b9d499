#include "ctap2/cose.hpp"

#include "crypto/p256.hpp"
#include "ctap2/status.hpp"

namespace vauth::ctap2 {

namespace {
constexpr std::int64_t kKeyKty = 1;
constexpr std::int64_t kKeyAlg = 3;
constexpr std::int64_t kKeyCrv = -1;
constexpr std::int64_t kKeyX = -2;
constexpr std::int64_t kKeyY = -3;
} // namespace

cbor::Value cose_ec2_encode(const CoseEc2Key& key)
{
    return cbor::Map{
        {kKeyKty, kCoseKtyEc2},
        {kKeyAlg, key.alg},
        {kKeyCrv, kCoseCrvP256},
        {kKeyX, key.x},
        {kKeyY, key.y},
    };
}

CoseEc2Key cose_ec2_decode(const cbor::Value& cose_map)
{
    if (!cose_map.is_map())
        throw CtapError(Status::cbor_unexpected_type, "COSE key is not a map");
    auto int_field = [&](std::int64_t label) -> std::int64_t {
        const cbor::Value* v = cose_map.find(label);
        if (!v)
            throw CtapError(Status::missing_parameter, "COSE key field missing");
        if (!v->is_int())
            throw CtapError(Status::cbor_unexpected_type, "COSE key field is not an integer");
        return v->as_int();
    };
    if (int_field(kKeyKty) != kCoseKtyEc2)
        throw CtapError(Status::unsupported_algorithm, "COSE key type is not EC2");
    if (int_field(kKeyCrv) != kCoseCrvP256)
        throw CtapError(Status::unsupported_algorithm, "COSE curve is not P-256");
    std::int64_t alg = int_field(kKeyAlg);
    if (alg != cose_alg::es256 && alg != cose_alg::ecdh_es_hkdf_256)
        throw CtapError(Status::unsupported_algorithm, "COSE algorithm not supported");

    const cbor::Value* x = cose_map.find(kKeyX);
    const cbor::Value* y = cose_map.find(kKeyY);
    if (!x || !y)
        throw CtapError(Status::missing_parameter, "COSE key coordinates missing");
    if (!x->is_bytes() || !y->is_bytes())
        throw CtapError(Status::cbor_unexpected_type, "COSE coordinates are not byte strings");
    if (x->as_bytes().size() != 32 || y->as_bytes().size() != 32)
        throw CtapError(Status::invalid_parameter, "COSE coordinates must be 32 bytes");
    if (!crypto::P256Key::is_on_curve(x->as_bytes(), y->as_bytes()))
        throw CtapError(Status::invalid_parameter, "COSE point is not on P-256");
    return CoseEc2Key{alg, x->as_bytes(), y->as_bytes()};
}

} // namespace vauth::ctap2
