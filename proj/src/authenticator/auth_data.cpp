#include "authenticator/auth_data.hpp"

#include <stdexcept>

#include "crypto/primitives.hpp"

namespace vauth::authenticator {

Bytes build_auth_data(std::string_view rp_id, std::uint8_t flag_bits, std::uint32_t counter,
                      const std::optional<AttestedCredentialData>& attested)
{
    Bytes out = crypto::sha256_bytes(to_bytes(rp_id));
    flag_bits = attested ? (flag_bits | flags::at) : (flag_bits & ~flags::at);
    out.push_back(flag_bits);
    put_u32_be(out, counter);
    if (attested) {
        if (attested->aaguid.size() != 16)
            throw std::invalid_argument("aaguid must be 16 bytes");
        if (attested->credential_id.size() > 0xFFFF)
            throw std::invalid_argument("credential id too long");
        append(out, attested->aaguid);
        put_u16_be(out, static_cast<std::uint16_t>(attested->credential_id.size()));
        append(out, attested->credential_id);
        append(out, attested->cose_public_key);
    }
    return out;
}

ParsedAuthData parse_auth_data(ByteView data)
{
    if (data.size() < 37)
        throw std::invalid_argument("authData shorter than 37 bytes");
    ParsedAuthData p;
    p.rp_id_hash.assign(data.begin(), data.begin() + 32);
    p.flags = data[32];
    p.counter = get_u32_be(data.data() + 33);
    if (!(p.flags & flags::at)) {
        if (data.size() != 37)
            throw std::invalid_argument("trailing bytes after authData");
        return p;
    }
    if (data.size() < 37 + 18)
        throw std::invalid_argument("attested credential data truncated");
    AttestedCredentialData a;
    a.aaguid.assign(data.begin() + 37, data.begin() + 53);
    std::size_t id_len = (std::size_t{data[53]} << 8) | data[54];
    if (data.size() < 55 + id_len + 1)
        throw std::invalid_argument("credential id truncated");
    a.credential_id.assign(data.begin() + 55, data.begin() + 55 + static_cast<std::ptrdiff_t>(id_len));
    ByteView rest = data.subspan(55 + id_len);
    try {
        auto [key, used] = cbor::decode_prefix(rest);
        if (used != rest.size())
            throw std::invalid_argument("trailing bytes after credential public key");
        a.cose_public_key.assign(rest.begin(), rest.end());
        p.public_key = std::move(key);
    } catch (const cbor::DecodeError& e) {
        throw std::invalid_argument(std::string("credential public key: ") + e.what());
    }
    p.attested = std::move(a);
    return p;
}

} // namespace vauth::authenticator
