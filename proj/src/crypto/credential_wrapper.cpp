#include "crypto/credential_wrapper.hpp"

#include "crypto/key_wrap.hpp"
#include "crypto/primitives.hpp"

namespace vauth::crypto {

Bytes AesCredentialWrapper::generate_key() const { return random_bytes(kWrapKeySize); }

Bytes AesCredentialWrapper::wrap(ByteView key, ByteView plaintext) const
{
    if (key.size() != kWrapKeySize)
        throw CryptoError("credential wrap key must be 32 bytes");
    return aes_key_wrap_pad(key, plaintext);
}

std::optional<Bytes> AesCredentialWrapper::unwrap(ByteView key, ByteView wrapped) const
{
    if (key.size() != kWrapKeySize)
        throw CryptoError("credential wrap key must be 32 bytes");
    return aes_key_unwrap_pad(key, wrapped);
}

Bytes wrap_credential(ByteView key, ByteView plaintext) { return AesCredentialWrapper{}.wrap(key, plaintext); }

std::optional<Bytes> unwrap_credential(ByteView key, ByteView wrapped)
{
    return AesCredentialWrapper{}.unwrap(key, wrapped);
}

} // namespace vauth::crypto
