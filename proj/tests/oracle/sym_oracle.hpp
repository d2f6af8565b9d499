#pragma once

// Table-free AES, CBC and HMAC-SHA-256 written from FIPS 197 / RFC 2104 for cross-checking.

#include <cstdint>
#include <vector>

namespace oracle {

using Bytes = std::vector<std::uint8_t>;

Bytes hmac_sha256(const Bytes& key, const Bytes& data);

/// Key of 16 or 32 bytes; data a multiple of 16; no padding.
Bytes aes_cbc_encrypt(const Bytes& key, const Bytes& iv, const Bytes& data);
Bytes aes_cbc_decrypt(const Bytes& key, const Bytes& iv, const Bytes& data);

Bytes pkcs7_pad(const Bytes& data);

} // namespace oracle
