#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "common/bytes.hpp"

namespace vauth::storage {

constexpr std::uint8_t kEnvelopeVersion = 0x80;
constexpr std::size_t kSaltSize = 16;
constexpr unsigned kDefaultKdfIterations = 600000;

// salt(16) | version(1) | timestamp(8) | iv(16) | ciphertext(16n, n >= 1) | hmac(32)
constexpr std::size_t kEnvelopeHeaderSize = kSaltSize + 1 + 8 + 16;
constexpr std::size_t kEnvelopeMinSize = kEnvelopeHeaderSize + 16 + 32;

enum class EnvelopeErrorKind { format, authentication };

class EnvelopeError : public std::runtime_error {
public:
    EnvelopeError(EnvelopeErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    EnvelopeErrorKind kind() const noexcept { return kind_; }

private:
    EnvelopeErrorKind kind_;
};

/// PBKDF2-HMAC-SHA256 to 32 bytes. Bytes 0..15 key the HMAC, bytes 16..31
/// key AES-128-CBC. Throws std::invalid_argument for an empty password.
Bytes derive_storage_key(std::string_view password, ByteView salt, unsigned iterations = kDefaultKdfIterations);

Bytes seal_envelope(ByteView key, ByteView salt, ByteView plaintext, std::uint64_t timestamp);
Bytes seal_envelope(ByteView key, ByteView salt, ByteView plaintext);

/// Structure is checked before the tag; the tag is checked before any
/// decryption or unpadding.
Bytes open_envelope(ByteView key, ByteView envelope);

/// Salt prefix, after a size check.
Bytes envelope_salt(ByteView envelope);
std::uint64_t envelope_timestamp(ByteView envelope);

} // namespace vauth::storage
