#include "ctap2/messages.hpp"

namespace vauth::ctap2 {

using cbor::Value;

namespace {

[[noreturn]] void unexpected(const std::string& what)
{
    throw CtapError(Status::cbor_unexpected_type, what);
}

[[noreturn]] void missing(const std::string& what)
{
    throw CtapError(Status::missing_parameter, "missing " + what);
}

[[noreturn]] void invalid(const std::string& what)
{
    throw CtapError(Status::invalid_parameter, what);
}

const Value* field(const Value& map, const Value& key) { return map.find(key); }

const Value& require(const Value& map, const Value& key, const std::string& name)
{
    const Value* v = map.find(key);
    if (!v)
        missing(name);
    return *v;
}

const Bytes& bytes_of(const Value& v, const std::string& name)
{
    if (!v.is_bytes())
        unexpected(name + " must be a byte string");
    return v.as_bytes();
}

const std::string& text_of(const Value& v, const std::string& name)
{
    if (!v.is_text())
        unexpected(name + " must be a text string");
    return v.as_text();
}

std::int64_t int_of(const Value& v, const std::string& name)
{
    if (!v.is_int())
        unexpected(name + " must be an integer");
    return v.as_int();
}

const cbor::Array& array_of(const Value& v, const std::string& name)
{
    if (!v.is_array())
        unexpected(name + " must be an array");
    return v.as_array();
}

const Value& map_of(const Value& v, const std::string& name)
{
    if (!v.is_map())
        unexpected(name + " must be a map");
    return v;
}

std::optional<std::string> optional_text(const Value& map, const char* key)
{
    const Value* v = map.find(key);
    if (!v)
        return std::nullopt;
    return text_of(*v, key);
}

std::optional<std::vector<CredentialDescriptor>> descriptor_list(const Value* v, const std::string& name)
{
    if (!v)
        return std::nullopt;
    std::vector<CredentialDescriptor> out;
    for (const auto& item : array_of(*v, name))
        out.push_back(decode_descriptor(item));
    return out;
}

struct Options {
    std::optional<bool> rk, up, uv;
};

Options decode_options(const Value* v)
{
    Options o;
    if (!v)
        return o;
    map_of(*v, "options");
    for (const auto& [k, val] : v->as_map()) {
        const std::string& name = text_of(k, "option key");
        if (!val.is_bool())
            unexpected("option " + name + " must be a boolean");
        if (name == "rk")
            o.rk = val.as_bool();
        else if (name == "up")
            o.up = val.as_bool();
        else if (name == "uv")
            o.uv = val.as_bool();
    }
    return o;
}

Bytes client_data_hash(const Value& v)
{
    const Bytes& h = bytes_of(v, "clientDataHash");
    if (h.size() != kClientDataHashSize)
        invalid("clientDataHash must be 32 bytes");
    return h;
}

std::optional<Bytes> pin_auth_of(const Value* v)
{
    if (!v)
        return std::nullopt;
    return bytes_of(*v, "pinAuth");
}

std::optional<std::int64_t> pin_protocol_of(const Value* v)
{
    if (!v)
        return std::nullopt;
    return int_of(*v, "pinProtocol");
}

MakeCredentialParameters decode_make_credential(const Value& m)
{
    MakeCredentialParameters p;
    p.client_data_hash = client_data_hash(require(m, 1, "clientDataHash"));

    const Value& rp = map_of(require(m, 2, "rp"), "rp");
    p.rp.id = text_of(require(rp, "id", "rp.id"), "rp.id");
    if (p.rp.id.empty())
        invalid("rp.id is empty");
    p.rp.name = optional_text(rp, "name");

    p.user = decode_user(require(m, 3, "user"));

    for (const auto& item : array_of(require(m, 4, "pubKeyCredParams"), "pubKeyCredParams")) {
        map_of(item, "pubKeyCredParams entry");
        CredentialParameter cp;
        cp.type = text_of(require(item, "type", "pubKeyCredParams.type"), "type");
        cp.alg = int_of(require(item, "alg", "pubKeyCredParams.alg"), "alg");
        p.pub_key_cred_params.push_back(cp);
    }
    if (p.pub_key_cred_params.empty())
        invalid("pubKeyCredParams is empty");

    p.exclude_list = descriptor_list(field(m, 5), "excludeList");
    if (const Value* ext = field(m, 6))
        map_of(*ext, "extensions");
    Options o = decode_options(field(m, 7));
    p.rk = o.rk;
    p.uv = o.uv;
    p.pin_auth = pin_auth_of(field(m, 8));
    p.pin_protocol = pin_protocol_of(field(m, 9));
    return p;
}

GetAssertionParameters decode_get_assertion(const Value& m)
{
    GetAssertionParameters p;
    p.rp_id = text_of(require(m, 1, "rpId"), "rpId");
    if (p.rp_id.empty())
        invalid("rpId is empty");
    p.client_data_hash = client_data_hash(require(m, 2, "clientDataHash"));
    p.allow_list = descriptor_list(field(m, 3), "allowList");
    if (const Value* ext = field(m, 4))
        map_of(*ext, "extensions");
    Options o = decode_options(field(m, 5));
    if (o.rk)
        throw CtapError(Status::invalid_option, "rk is not a getAssertion option");
    p.up = o.up;
    p.uv = o.uv;
    p.pin_auth = pin_auth_of(field(m, 6));
    p.pin_protocol = pin_protocol_of(field(m, 7));
    return p;
}

ClientPinParameters decode_client_pin(const Value& m)
{
    ClientPinParameters p;
    p.pin_protocol = int_of(require(m, 1, "pinProtocol"), "pinProtocol");
    std::int64_t sub = int_of(require(m, 2, "subCommand"), "subCommand");
    if (sub < 1 || sub > 5)
        invalid("unknown clientPIN subCommand " + std::to_string(sub));
    p.sub_command = static_cast<PinSubCommand>(sub);
    if (const Value* ka = field(m, 3)) {
        map_of(*ka, "keyAgreement");
        p.key_agreement = cose_ec2_decode(*ka);
    }
    p.pin_auth = pin_auth_of(field(m, 4));
    if (const Value* v = field(m, 5))
        p.new_pin_enc = bytes_of(*v, "newPinEnc");
    if (const Value* v = field(m, 6))
        p.pin_hash_enc = bytes_of(*v, "pinHashEnc");

    switch (p.sub_command) {
    case PinSubCommand::set_pin:
        if (!p.key_agreement)
            missing("keyAgreement");
        if (!p.pin_auth)
            missing("pinAuth");
        if (!p.new_pin_enc)
            missing("newPinEnc");
        break;
    case PinSubCommand::change_pin:
        if (!p.key_agreement)
            missing("keyAgreement");
        if (!p.pin_auth)
            missing("pinAuth");
        if (!p.new_pin_enc)
            missing("newPinEnc");
        if (!p.pin_hash_enc)
            missing("pinHashEnc");
        break;
    case PinSubCommand::get_pin_token:
        if (!p.key_agreement)
            missing("keyAgreement");
        if (!p.pin_hash_enc)
            missing("pinHashEnc");
        break;
    default:
        break;
    }
    return p;
}

cbor::Value encode_options(std::optional<bool> rk, std::optional<bool> up, std::optional<bool> uv)
{
    cbor::Map m;
    if (rk)
        m.emplace_back("rk", *rk);
    if (up)
        m.emplace_back("up", *up);
    if (uv)
        m.emplace_back("uv", *uv);
    return m;
}

cbor::Array descriptor_array(const std::vector<CredentialDescriptor>& list)
{
    cbor::Array a;
    for (const auto& d : list)
        a.push_back(encode_descriptor(d));
    return a;
}

template <typename T>
std::vector<T> typed_list(const Value& v, const std::string& name)
{
    std::vector<T> out;
    for (const auto& item : array_of(v, name)) {
        if constexpr (std::is_same_v<T, std::string>)
            out.push_back(text_of(item, name));
        else
            out.push_back(int_of(item, name));
    }
    return out;
}

} // namespace

const char* command_name(Command c)
{
    switch (c) {
    case Command::make_credential: return "authenticatorMakeCredential";
    case Command::get_assertion: return "authenticatorGetAssertion";
    case Command::get_info: return "authenticatorGetInfo";
    case Command::client_pin: return "authenticatorClientPIN";
    case Command::reset: return "authenticatorReset";
    case Command::get_next_assertion: return "authenticatorGetNextAssertion";
    }
    return "unknown";
}

Command command_of(const Request& r)
{
    struct V {
        Command operator()(const MakeCredentialParameters&) const { return Command::make_credential; }
        Command operator()(const GetAssertionParameters&) const { return Command::get_assertion; }
        Command operator()(const GetInfoRequest&) const { return Command::get_info; }
        Command operator()(const ClientPinParameters&) const { return Command::client_pin; }
        Command operator()(const ResetRequest&) const { return Command::reset; }
        Command operator()(const GetNextAssertionRequest&) const { return Command::get_next_assertion; }
    };
    return std::visit(V{}, r);
}

cbor::Value encode_user(const UserEntity& u)
{
    cbor::Map m{{"id", u.id}};
    if (u.name)
        m.emplace_back("name", *u.name);
    if (u.display_name)
        m.emplace_back("displayName", *u.display_name);
    return m;
}

UserEntity decode_user(const cbor::Value& v)
{
    map_of(v, "user");
    UserEntity u;
    u.id = bytes_of(require(v, "id", "user.id"), "user.id");
    if (u.id.empty() || u.id.size() > 64)
        invalid("user.id must be 1..64 bytes");
    u.name = optional_text(v, "name");
    u.display_name = optional_text(v, "displayName");
    return u;
}

cbor::Value encode_descriptor(const CredentialDescriptor& d)
{
    cbor::Map m{{"type", d.type}, {"id", d.id}};
    if (d.transports) {
        cbor::Array t;
        for (const auto& s : *d.transports)
            t.emplace_back(s);
        m.emplace_back("transports", std::move(t));
    }
    return m;
}

CredentialDescriptor decode_descriptor(const cbor::Value& v)
{
    map_of(v, "credential descriptor");
    CredentialDescriptor d;
    d.type = text_of(require(v, "type", "descriptor.type"), "descriptor.type");
    d.id = bytes_of(require(v, "id", "descriptor.id"), "descriptor.id");
    if (d.type != kPublicKeyType)
        invalid("descriptor type must be public-key");
    if (d.id.empty())
        invalid("descriptor id is empty");
    if (const Value* t = v.find("transports"))
        d.transports = typed_list<std::string>(*t, "transports");
    return d;
}

Request decode_request(ByteView payload)
{
    if (payload.empty())
        throw CtapError(Status::invalid_length, "empty CBOR request");
    std::uint8_t cmd = payload[0];
    ByteView body = payload.subspan(1);

    auto parse_body = [&]() -> Value {
        if (body.empty())
            missing("request parameters");
        Value v;
        try {
            v = cbor::decode(body);
        } catch (const cbor::DecodeError& e) {
            throw CtapError(Status::invalid_cbor, e.what());
        }
        if (!v.is_map())
            unexpected("request parameters must be a map");
        for (const auto& [k, _] : v.as_map())
            if (!k.is_int())
                unexpected("request parameter keys must be integers");
        return v;
    };
    auto no_body = [&](const char* name) {
        if (!body.empty())
            throw CtapError(Status::invalid_length, std::string(name) + " takes no parameters");
    };

    try {
        switch (cmd) {
        case static_cast<std::uint8_t>(Command::make_credential):
            return decode_make_credential(parse_body());
        case static_cast<std::uint8_t>(Command::get_assertion):
            return decode_get_assertion(parse_body());
        case static_cast<std::uint8_t>(Command::get_info):
            no_body("getInfo");
            return GetInfoRequest{};
        case static_cast<std::uint8_t>(Command::client_pin):
            return decode_client_pin(parse_body());
        case static_cast<std::uint8_t>(Command::reset):
            no_body("reset");
            return ResetRequest{};
        case static_cast<std::uint8_t>(Command::get_next_assertion):
            no_body("getNextAssertion");
            return GetNextAssertionRequest{};
        default:
            throw CtapError(Status::invalid_command, "unknown CTAP2 command byte " + std::to_string(cmd));
        }
    } catch (const cbor::TypeError& e) {
        throw CtapError(Status::cbor_unexpected_type, e.what());
    }
}

Bytes encode_request(const Request& r)
{
    Bytes out{static_cast<std::uint8_t>(command_of(r))};
    std::optional<cbor::Map> body;
    if (auto* p = std::get_if<MakeCredentialParameters>(&r)) {
        cbor::Map m;
        m.emplace_back(1, p->client_data_hash);
        cbor::Map rp{{"id", p->rp.id}};
        if (p->rp.name)
            rp.emplace_back("name", *p->rp.name);
        m.emplace_back(2, std::move(rp));
        m.emplace_back(3, encode_user(p->user));
        cbor::Array params;
        for (const auto& cp : p->pub_key_cred_params)
            params.push_back(cbor::Map{{"alg", cp.alg}, {"type", cp.type}});
        m.emplace_back(4, std::move(params));
        if (p->exclude_list)
            m.emplace_back(5, descriptor_array(*p->exclude_list));
        if (p->rk || p->uv)
            m.emplace_back(7, encode_options(p->rk, std::nullopt, p->uv));
        if (p->pin_auth)
            m.emplace_back(8, *p->pin_auth);
        if (p->pin_protocol)
            m.emplace_back(9, *p->pin_protocol);
        body = std::move(m);
    } else if (auto* p = std::get_if<GetAssertionParameters>(&r)) {
        cbor::Map m;
        m.emplace_back(1, p->rp_id);
        m.emplace_back(2, p->client_data_hash);
        if (p->allow_list)
            m.emplace_back(3, descriptor_array(*p->allow_list));
        if (p->up || p->uv)
            m.emplace_back(5, encode_options(std::nullopt, p->up, p->uv));
        if (p->pin_auth)
            m.emplace_back(6, *p->pin_auth);
        if (p->pin_protocol)
            m.emplace_back(7, *p->pin_protocol);
        body = std::move(m);
    } else if (auto* p = std::get_if<ClientPinParameters>(&r)) {
        cbor::Map m;
        m.emplace_back(1, p->pin_protocol);
        m.emplace_back(2, static_cast<std::int64_t>(p->sub_command));
        if (p->key_agreement)
            m.emplace_back(3, cose_ec2_encode(*p->key_agreement));
        if (p->pin_auth)
            m.emplace_back(4, *p->pin_auth);
        if (p->new_pin_enc)
            m.emplace_back(5, *p->new_pin_enc);
        if (p->pin_hash_enc)
            m.emplace_back(6, *p->pin_hash_enc);
        body = std::move(m);
    }
    if (body)
        append(out, cbor::encode(*body));
    return out;
}

Bytes encode_status(Status s) { return Bytes{static_cast<std::uint8_t>(s)}; }

Bytes encode_response(const Response& r)
{
    cbor::Map m;
    if (auto* p = std::get_if<MakeCredentialResponse>(&r)) {
        m.emplace_back(1, p->fmt);
        m.emplace_back(2, p->auth_data);
        m.emplace_back(3, cbor::Map{{"alg", p->att_stmt.alg}, {"sig", p->att_stmt.sig}});
    } else if (auto* p = std::get_if<GetAssertionResponse>(&r)) {
        m.emplace_back(1, encode_descriptor(p->credential));
        m.emplace_back(2, p->auth_data);
        m.emplace_back(3, p->signature);
        if (p->user)
            m.emplace_back(4, encode_user(*p->user));
        if (p->number_of_credentials)
            m.emplace_back(5, *p->number_of_credentials);
    } else if (auto* p = std::get_if<GetInfoResponse>(&r)) {
        cbor::Array versions;
        for (const auto& v : p->versions)
            versions.emplace_back(v);
        m.emplace_back(1, std::move(versions));
        if (p->extensions) {
            cbor::Array ext;
            for (const auto& e : *p->extensions)
                ext.emplace_back(e);
            m.emplace_back(2, std::move(ext));
        }
        m.emplace_back(3, p->aaguid);
        if (!p->options.empty()) {
            cbor::Map opts;
            for (const auto& [k, v] : p->options)
                opts.emplace_back(k, v);
            m.emplace_back(4, std::move(opts));
        }
        if (p->max_msg_size)
            m.emplace_back(5, *p->max_msg_size);
        if (p->pin_protocols) {
            cbor::Array pp;
            for (auto v : *p->pin_protocols)
                pp.emplace_back(v);
            m.emplace_back(6, std::move(pp));
        }
        if (p->algorithms) {
            cbor::Array algs;
            for (auto a : *p->algorithms)
                algs.push_back(cbor::Map{{"alg", a}, {"type", kPublicKeyType}});
            m.emplace_back(10, std::move(algs));
        }
    } else if (auto* p = std::get_if<ClientPinResponse>(&r)) {
        if (p->key_agreement)
            m.emplace_back(1, cose_ec2_encode(*p->key_agreement));
        if (p->pin_token)
            m.emplace_back(2, *p->pin_token);
        if (p->retries)
            m.emplace_back(3, *p->retries);
    }
    Bytes out = encode_status(Status::ok);
    if (!m.empty())
        append(out, cbor::encode(m));
    return out;
}

DecodedResponse decode_response(Command for_command, ByteView payload)
{
    if (payload.empty())
        throw CtapError(Status::invalid_length, "empty CTAP2 response");
    DecodedResponse out;
    out.status = static_cast<Status>(payload[0]);
    if (out.status != Status::ok)
        return out;
    ByteView body = payload.subspan(1);

    Value m{cbor::Map{}};
    if (!body.empty()) {
        try {
            m = cbor::decode(body);
        } catch (const cbor::DecodeError& e) {
            throw CtapError(Status::invalid_cbor, e.what());
        }
        if (!m.is_map())
            unexpected("response body must be a map");
    }

    try {
        switch (for_command) {
        case Command::make_credential: {
            MakeCredentialResponse r;
            r.fmt = text_of(require(m, 1, "fmt"), "fmt");
            r.auth_data = bytes_of(require(m, 2, "authData"), "authData");
            const Value& st = map_of(require(m, 3, "attStmt"), "attStmt");
            r.att_stmt.alg = int_of(require(st, "alg", "attStmt.alg"), "alg");
            r.att_stmt.sig = bytes_of(require(st, "sig", "attStmt.sig"), "sig");
            out.body = r;
            break;
        }
        case Command::get_assertion:
        case Command::get_next_assertion: {
            GetAssertionResponse r;
            r.credential = decode_descriptor(require(m, 1, "credential"));
            r.auth_data = bytes_of(require(m, 2, "authData"), "authData");
            r.signature = bytes_of(require(m, 3, "signature"), "signature");
            if (const Value* u = field(m, 4))
                r.user = decode_user(*u);
            if (const Value* n = field(m, 5))
                r.number_of_credentials = int_of(*n, "numberOfCredentials");
            out.body = r;
            break;
        }
        case Command::get_info: {
            GetInfoResponse r;
            r.versions = typed_list<std::string>(require(m, 1, "versions"), "versions");
            if (const Value* v = field(m, 2))
                r.extensions = typed_list<std::string>(*v, "extensions");
            r.aaguid = bytes_of(require(m, 3, "aaguid"), "aaguid");
            if (const Value* v = field(m, 4)) {
                map_of(*v, "options");
                for (const auto& [k, val] : v->as_map()) {
                    if (!val.is_bool())
                        unexpected("option value must be a boolean");
                    r.options[text_of(k, "option key")] = val.as_bool();
                }
            }
            if (const Value* v = field(m, 5))
                r.max_msg_size = int_of(*v, "maxMsgSize");
            if (const Value* v = field(m, 6))
                r.pin_protocols = typed_list<std::int64_t>(*v, "pinProtocols");
            if (const Value* v = field(m, 10)) {
                std::vector<std::int64_t> algs;
                for (const auto& item : array_of(*v, "algorithms"))
                    algs.push_back(int_of(require(map_of(item, "algorithm"), "alg", "algorithms.alg"), "alg"));
                r.algorithms = algs;
            }
            out.body = r;
            break;
        }
        case Command::client_pin: {
            ClientPinResponse r;
            if (const Value* v = field(m, 1))
                r.key_agreement = cose_ec2_decode(map_of(*v, "keyAgreement"));
            if (const Value* v = field(m, 2))
                r.pin_token = bytes_of(*v, "pinToken");
            if (const Value* v = field(m, 3))
                r.retries = int_of(*v, "retries");
            out.body = r;
            break;
        }
        case Command::reset:
            out.body = ResetResponse{};
            break;
        }
    } catch (const cbor::TypeError& e) {
        throw CtapError(Status::cbor_unexpected_type, e.what());
    }
    return out;
}

} // namespace vauth::ctap2
