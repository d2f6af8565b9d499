#pragma once

#include <optional>

#include "common/bytes.hpp"

namespace vauth::crypto {

// AES key wrap with padding (RFC 5649). The KEK may be 16, 24 or 32 bytes.

/// Throws CryptoError on an empty plaintext or a bad KEK size.
Bytes aes_key_wrap_pad(ByteView kek, ByteView plaintext);

/// Returns nullopt when the integrity check fails or the input is malformed.
std::optional<Bytes> aes_key_unwrap_pad(ByteView kek, ByteView wrapped);

} // namespace vauth::crypto
