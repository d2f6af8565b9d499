#include "ctap2/pin_protocol.hpp"

#include <stdexcept>

#include "crypto/primitives.hpp"

namespace vauth::ctap2::pin_v1 {

namespace {
const Bytes kZeroIv(16, 0);
} // namespace

Bytes shared_secret(const crypto::P256Key& own_private, const crypto::P256Key& peer_public)
{
    return crypto::sha256_bytes(own_private.ecdh_x(peer_public));
}

Bytes authenticate(ByteView key, ByteView data)
{
    Bytes mac = crypto::hmac_sha256(key, data);
    mac.resize(16);
    return mac;
}

Bytes encrypt(ByteView shared, ByteView plaintext) { return crypto::aes256_cbc_encrypt(shared, kZeroIv, plaintext); }

Bytes decrypt(ByteView shared, ByteView ciphertext)
{
    return crypto::aes256_cbc_decrypt(shared, kZeroIv, ciphertext);
}

Bytes pin_hash(std::string_view pin)
{
    Bytes h = crypto::sha256_bytes(to_bytes(pin));
    h.resize(16);
    return h;
}

Bytes pad_pin(std::string_view pin)
{
    if (pin.size() > kMaxPinLength)
        throw std::invalid_argument("PIN longer than 63 bytes");
    Bytes out = to_bytes(pin);
    out.resize(kPaddedPinSize, 0);
    return out;
}

} // namespace vauth::ctap2::pin_v1
