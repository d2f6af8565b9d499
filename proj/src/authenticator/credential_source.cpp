#include "authenticator/credential_source.hpp"

#include <stdexcept>

namespace vauth::authenticator {

namespace {
enum Key : std::int64_t {
    k_type = 1,
    k_id = 2,
    k_key_handle = 3,
    k_rp_id = 4,
    k_rp_name = 5,
    k_user = 6,
    k_alg = 7,
    k_ordinal = 8,
};
} // namespace

Bytes serialize(const CredentialSource& s)
{
    cbor::Map m;
    m.emplace_back(k_type, s.type);
    m.emplace_back(k_id, s.credential_id);
    m.emplace_back(k_key_handle, s.key_handle);
    m.emplace_back(k_rp_id, s.rp_id);
    if (s.rp_name)
        m.emplace_back(k_rp_name, *s.rp_name);
    m.emplace_back(k_user, ctap2::encode_user(s.user));
    m.emplace_back(k_alg, s.alg);
    m.emplace_back(k_ordinal, static_cast<std::int64_t>(s.created_ordinal));
    return cbor::encode(m);
}

CredentialSource deserialize_credential_source(ByteView data)
{
    try {
        cbor::Value v = cbor::decode(data);
        auto get = [&](std::int64_t key) -> const cbor::Value& {
            const cbor::Value* f = v.find(key);
            if (!f)
                throw std::invalid_argument("credential source field " + std::to_string(key) + " missing");
            return *f;
        };
        CredentialSource s;
        s.type = get(k_type).as_text();
        s.credential_id = get(k_id).as_bytes();
        s.key_handle = get(k_key_handle).as_bytes();
        s.rp_id = get(k_rp_id).as_text();
        if (const cbor::Value* n = v.find(k_rp_name))
            s.rp_name = n->as_text();
        s.user = ctap2::decode_user(get(k_user));
        s.alg = get(k_alg).as_int();
        std::int64_t ordinal = get(k_ordinal).as_int();
        if (ordinal < 0)
            throw std::invalid_argument("negative credential ordinal");
        s.created_ordinal = static_cast<std::uint64_t>(ordinal);
        return s;
    } catch (const cbor::DecodeError& e) {
        throw std::invalid_argument(std::string("credential source: ") + e.what());
    } catch (const cbor::TypeError& e) {
        throw std::invalid_argument(std::string("credential source: ") + e.what());
    } catch (const ctap2::CtapError& e) {
        throw std::invalid_argument(std::string("credential source: ") + e.what());
    }
}

} // namespace vauth::authenticator
