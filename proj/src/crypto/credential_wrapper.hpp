#pragma once

#include <optional>

#include "common/bytes.hpp"

namespace vauth::crypto {

constexpr std::size_t kWrapKeySize = 32;

/// Protects credential sources that leave the authenticator as credential ids.
class CredentialWrapper {
public:
    virtual ~CredentialWrapper() = default;
    virtual Bytes generate_key() const = 0;
    virtual Bytes wrap(ByteView key, ByteView plaintext) const = 0;
    /// nullopt on any integrity failure.
    virtual std::optional<Bytes> unwrap(ByteView key, ByteView wrapped) const = 0;
};

/// AES-256 key wrap with padding.
class AesCredentialWrapper : public CredentialWrapper {
public:
    Bytes generate_key() const override;
    Bytes wrap(ByteView key, ByteView plaintext) const override;
    std::optional<Bytes> unwrap(ByteView key, ByteView wrapped) const override;
};

Bytes wrap_credential(ByteView key, ByteView plaintext);
std::optional<Bytes> unwrap_credential(ByteView key, ByteView wrapped);

} // namespace vauth::crypto
