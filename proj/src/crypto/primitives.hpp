#pragma once

#include <array>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "common/bytes.hpp"

typedef struct evp_cipher_ctx_st EVP_CIPHER_CTX;

namespace vauth::crypto {

class CryptoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(ByteView data);
Bytes sha256_bytes(ByteView data);
Bytes hmac_sha256(ByteView key, ByteView data);

Bytes random_bytes(std::size_t n);

/// While alive, random_bytes() returns a stream derived from `seed` by
/// HMAC-SHA-256 in counter mode, and P-256 key generation and signing draw
/// from it. Only for reproducible test traces. Process-wide; do not nest.
class DeterministicRandomScope {
public:
    explicit DeterministicRandomScope(ByteView seed);
    ~DeterministicRandomScope();
    DeterministicRandomScope(const DeterministicRandomScope&) = delete;
    DeterministicRandomScope& operator=(const DeterministicRandomScope&) = delete;
};

bool deterministic_random_active();

bool constant_time_equal(ByteView a, ByteView b);

/// Overwrites the buffer in a way the optimizer will not elide.
void cleanse(Bytes& b);

// AES-CBC without padding; input length must be a multiple of 16.
Bytes aes256_cbc_encrypt(ByteView key, ByteView iv, ByteView plaintext);
Bytes aes256_cbc_decrypt(ByteView key, ByteView iv, ByteView ciphertext);

// AES-128-CBC with PKCS#7 padding. Decrypt throws CryptoError on bad padding.
Bytes aes128_cbc_pkcs7_encrypt(ByteView key, ByteView iv, ByteView plaintext);
Bytes aes128_cbc_pkcs7_decrypt(ByteView key, ByteView iv, ByteView ciphertext);

/// AES-256-GCM; returns ciphertext || 16-byte tag.
Bytes aes256_gcm_seal(ByteView key, ByteView nonce, ByteView aad, ByteView plaintext);
std::optional<Bytes> aes256_gcm_open(ByteView key, ByteView nonce, ByteView aad, ByteView sealed);

Bytes pbkdf2_sha256(std::string_view password, ByteView salt, unsigned iterations, std::size_t out_len);

/// Raw single-block AES (ECB) for key wrapping; accepts 128, 192 or 256-bit keys.
class AesBlockCipher {
public:
    explicit AesBlockCipher(ByteView key);
    ~AesBlockCipher();
    AesBlockCipher(const AesBlockCipher&) = delete;
    AesBlockCipher& operator=(const AesBlockCipher&) = delete;

    void encrypt(std::uint8_t block[16]) const;
    void decrypt(std::uint8_t block[16]) const;

private:
    EVP_CIPHER_CTX* enc_ = nullptr;
    EVP_CIPHER_CTX* dec_ = nullptr;
};

} // namespace vauth::crypto
