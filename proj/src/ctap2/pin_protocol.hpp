#pragma once

#include <string_view>

#include "common/bytes.hpp"
#include "crypto/p256.hpp"

// PIN/UV auth protocol one. Used by both the authenticator and the client.
namespace vauth::ctap2::pin_v1 {

constexpr std::int64_t kProtocol = 1;
constexpr int kMaxRetries = 8;
constexpr std::size_t kTokenSize = 16;
constexpr std::size_t kPaddedPinSize = 64;
constexpr std::size_t kMinPinLength = 4;
constexpr std::size_t kMaxPinLength = 63;

/// SHA-256 of the x-coordinate of own_private * peer_public.
Bytes shared_secret(const crypto::P256Key& own_private, const crypto::P256Key& peer_public);

/// Left 16 bytes of HMAC-SHA-256(key, data).
Bytes authenticate(ByteView key, ByteView data);

/// AES-256-CBC with an all-zero IV and no padding.
Bytes encrypt(ByteView shared, ByteView plaintext);
Bytes decrypt(ByteView shared, ByteView ciphertext);

/// Left 16 bytes of SHA-256(pin).
Bytes pin_hash(std::string_view pin);

/// PIN bytes followed by zeros up to 64 bytes. Throws std::invalid_argument
/// if the PIN does not fit.
Bytes pad_pin(std::string_view pin);

} // namespace vauth::ctap2::pin_v1
