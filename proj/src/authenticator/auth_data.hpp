#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "cbor/cbor.hpp"
#include "common/bytes.hpp"

namespace vauth::authenticator {

namespace flags {
constexpr std::uint8_t up = 0x01;
constexpr std::uint8_t uv = 0x04;
constexpr std::uint8_t at = 0x40;
} // namespace flags

struct AttestedCredentialData {
    Bytes aaguid; // 16 bytes
    Bytes credential_id;
    Bytes cose_public_key; // encoded COSE map
};

/// rpIdHash(32) || flags(1) || signCount(4, BE) || attested data. The AT
/// flag is set here when attested data is present and cleared otherwise.
Bytes build_auth_data(std::string_view rp_id, std::uint8_t flag_bits, std::uint32_t counter,
                      const std::optional<AttestedCredentialData>& attested = std::nullopt);

struct ParsedAuthData {
    Bytes rp_id_hash;
    std::uint8_t flags = 0;
    std::uint32_t counter = 0;
    std::optional<AttestedCredentialData> attested;
    std::optional<cbor::Value> public_key;
};

/// Throws std::invalid_argument on malformed input.
ParsedAuthData parse_auth_data(ByteView data);

} // namespace vauth::authenticator
