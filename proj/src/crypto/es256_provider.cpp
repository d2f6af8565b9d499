#include "crypto/es256_provider.hpp"

#include "ctap2/cose.hpp"

namespace vauth::crypto {

std::int64_t Es256PublicKey::algorithm() const { return ctap2::cose_alg::es256; }

cbor::Value Es256PublicKey::cose() const
{
    auto point = key_.public_point();
    return ctap2::cose_ec2_encode(ctap2::CoseEc2Key{ctap2::cose_alg::es256, point.x, point.y});
}

bool Es256PublicKey::verify(ByteView message, ByteView signature) const
{
    return key_.verify(message, signature);
}

std::int64_t Es256Provider::algorithm() const { return ctap2::cose_alg::es256; }

namespace {

KeyPair pair_from(const P256Key& key)
{
    return KeyPair{std::make_shared<Es256PublicKey>(P256Key::from_public(key.public_point())),
                   std::make_shared<Es256PrivateKey>(key)};
}

} // namespace

KeyPair Es256Provider::generate() { return pair_from(P256Key::generate()); }

KeyPair Es256Provider::load(ByteView encoded) { return pair_from(P256Key::from_pkcs8(encoded)); }

std::shared_ptr<const PublicKey> Es256Provider::load_public(const cbor::Value& cose)
{
    auto k = ctap2::cose_ec2_decode(cose);
    if (k.alg != ctap2::cose_alg::es256)
        throw UnsupportedAlgorithm(k.alg);
    return std::make_shared<Es256PublicKey>(P256Key::from_public(crypto::EcPoint{k.x, k.y}));
}

} // namespace vauth::crypto
