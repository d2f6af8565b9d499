#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "common/bytes.hpp"
#include "ctap2/messages.hpp"

namespace vauth::authenticator {

struct CredentialSource {
    std::string type = ctap2::kPublicKeyType;
    Bytes credential_id; // empty inside wrapped (non-resident) ids
    Bytes key_handle;    // provider-encoded private key
    std::string rp_id;
    std::optional<std::string> rp_name;
    ctap2::UserEntity user;
    std::int64_t alg = 0;
    std::uint64_t created_ordinal = 0;

    bool operator==(const CredentialSource&) const = default;
};

/// CBOR map with small integer keys.
Bytes serialize(const CredentialSource& s);

/// Throws std::invalid_argument for anything serialize() cannot produce.
CredentialSource deserialize_credential_source(ByteView data);

} // namespace vauth::authenticator
