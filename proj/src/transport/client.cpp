#include "transport/client.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "authenticator/auth_data.hpp"
#include "cbor/cbor.hpp"
#include "crypto/p256.hpp"
#include "crypto/primitives.hpp"
#include "ctap2/cose.hpp"
#include "ctap2/pin_protocol.hpp"
#include "ctap2/status.hpp"
#include "ctaphid/transaction.hpp"

namespace vauth::transport {

namespace cmd = ctaphid::cmd;
using ctap2::Status;

CtapStatusError::CtapStatusError(std::uint8_t status)
    : std::runtime_error("CTAP2 error 0x" + to_hex(Bytes{status}) + " (" +
                         ctap2::status_name(static_cast<Status>(status)) + ")"),
      status_(status)
{
}

// HidClient

void HidClient::send(std::uint8_t command, ByteView payload)
{
    for (const auto& p : hid::fragment(cid_, command, payload))
        transport_.write(hid::serialize(p));
}

HidClient::Reply HidClient::receive_on(hid::ChannelId cid)
{
    hid::Reassembler reassembler;
    auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0)
            throw HidError(ctaphid::err::msg_timeout, "no response from authenticator");
        auto report = transport_.read(left);
        if (!report)
            continue;
        hid::Packet pkt = hid::parse_packet(*report);
        if (hid::channel_of(pkt) != cid)
            continue;
        auto res = reassembler.push(pkt);
        if (res.error && res.error->kind() != hid::FramingErrorKind::spurious_init)
            throw HidError(ctaphid::err::other, std::string("malformed response: ") + res.error->what());
        if (!res.message)
            continue;
        if (res.message->cmd == cmd::keepalive) {
            ++keepalives_;
            continue;
        }
        return Reply{res.message->cmd, std::move(res.message->payload)};
    }
}

HidClient::Reply HidClient::receive() { return receive_on(cid_); }

HidClient::Reply HidClient::transact(std::uint8_t command, ByteView payload)
{
    send(command, payload);
    return receive();
}

hid::ChannelId HidClient::init()
{
    Bytes nonce = crypto::random_bytes(8);
    cid_ = hid::ChannelId::broadcast();
    send(cmd::init, nonce);
    for (;;) {
        Reply r = receive_on(hid::ChannelId::broadcast());
        if (r.cmd == cmd::error)
            throw HidError(r.payload.empty() ? ctaphid::err::other : r.payload[0], "INIT rejected");
        if (r.cmd != cmd::init || r.payload.size() < 17 || !std::equal(nonce.begin(), nonce.end(), r.payload.begin()))
            continue;
        cid_ = hid::ChannelId{get_u32_be(r.payload.data() + 8)};
        return cid_;
    }
}

Bytes HidClient::ping(ByteView data)
{
    Reply r = transact(cmd::ping, data);
    if (r.cmd == cmd::error)
        throw HidError(r.payload.empty() ? ctaphid::err::other : r.payload[0], "PING rejected");
    if (r.cmd != cmd::ping)
        throw HidError(ctaphid::err::other, "unexpected reply to PING");
    return r.payload;
}

void HidClient::wink()
{
    Reply r = transact(cmd::wink, {});
    if (r.cmd != cmd::wink)
        throw HidError(r.payload.empty() ? ctaphid::err::other : r.payload[0], "WINK rejected");
}

Bytes HidClient::cbor(ByteView request)
{
    Reply r = transact(cmd::cbor, request);
    if (r.cmd == cmd::error)
        throw HidError(r.payload.empty() ? ctaphid::err::other : r.payload[0],
                       "CTAPHID error 0x" + to_hex(ByteView(r.payload.data(), std::min<std::size_t>(1, r.payload.size()))));
    if (r.cmd != cmd::cbor || r.payload.empty())
        throw HidError(ctaphid::err::other, "unexpected reply to CBOR request");
    return r.payload;
}

void HidClient::cancel() { send(cmd::cancel, {}); }

// RecordBook

CredentialRecord* RecordBook::find(ByteView credential_id)
{
    for (auto& c : credentials)
        if (std::equal(c.credential_id.begin(), c.credential_id.end(), credential_id.begin(), credential_id.end()))
            return &c;
    return nullptr;
}

std::vector<CredentialRecord*> RecordBook::for_rp(const std::string& rp_id)
{
    std::vector<CredentialRecord*> out;
    for (auto& c : credentials)
        if (c.rp_id == rp_id)
            out.push_back(&c);
    return out;
}

std::string RecordBook::to_json() const
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : credentials) {
        nlohmann::json j;
        j["rp_id"] = c.rp_id;
        j["credential_id"] = to_hex(c.credential_id);
        j["public_key"] = to_hex(c.public_key);
        j["user_id"] = to_hex(c.user_id);
        j["user_name"] = c.user_name;
        j["resident"] = c.resident ? nlohmann::json(*c.resident) : nlohmann::json(nullptr);
        j["sign_count"] = c.sign_count;
        arr.push_back(std::move(j));
    }
    return nlohmann::json{{"credentials", arr}}.dump(2);
}

RecordBook RecordBook::from_json(const std::string& text)
{
    RecordBook book;
    try {
        auto j = nlohmann::json::parse(text);
        for (const auto& c : j.at("credentials")) {
            CredentialRecord r;
            r.rp_id = c.at("rp_id").get<std::string>();
            r.credential_id = from_hex(c.at("credential_id").get<std::string>());
            r.public_key = from_hex(c.at("public_key").get<std::string>());
            r.user_id = from_hex(c.at("user_id").get<std::string>());
            r.user_name = c.at("user_name").get<std::string>();
            if (c.contains("resident") && !c.at("resident").is_null())
                r.resident = c.at("resident").get<bool>();
            r.sign_count = c.at("sign_count").get<std::uint32_t>();
            book.credentials.push_back(std::move(r));
        }
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("bad credential record file: ") + e.what());
    }
    return book;
}

RecordBook RecordBook::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        return {};
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void RecordBook::save(const std::filesystem::path& path) const
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << to_json() << "\n";
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ConformanceClient

ConformanceClient::ConformanceClient(Transport& transport, RecordBook& records) : hid_(transport), records_(records) {}

void ConformanceClient::connect()
{
    hid_.init();
    connected_ = true;
}

ctap2::DecodedResponse ConformanceClient::call(const ctap2::Request& request)
{
    if (!connected_)
        connect();
    Bytes reply = hid_.cbor(ctap2::encode_request(request));
    auto decoded = ctap2::decode_response(ctap2::command_of(request), reply);
    last_status_ = static_cast<std::uint8_t>(decoded.status);
    if (decoded.status != Status::ok)
        throw CtapStatusError(last_status_);
    return decoded;
}

Bytes ConformanceClient::make_client_data_hash(const std::string& type, const std::string& rp_id)
{
    nlohmann::json cd;
    cd["type"] = type;
    cd["challenge"] = to_hex(crypto::random_bytes(32));
    cd["origin"] = "https://" + rp_id;
    return crypto::sha256_bytes(to_bytes(cd.dump()));
}

ctap2::GetInfoResponse ConformanceClient::get_info()
{
    return std::get<ctap2::GetInfoResponse>(*call(ctap2::GetInfoRequest{}).body);
}

namespace {

crypto::P256Key key_from_cose(ByteView cose_bytes)
{
    auto cose = ctap2::cose_ec2_decode(cbor::decode(cose_bytes));
    return crypto::P256Key::from_public(crypto::EcPoint{cose.x, cose.y});
}

void check_rp_hash(const authenticator::ParsedAuthData& ad, const std::string& rp_id)
{
    if (ad.rp_id_hash != crypto::sha256_bytes(to_bytes(rp_id)))
        throw VerificationError("rpIdHash does not match " + rp_id);
}

} // namespace

RegisterResult ConformanceClient::register_credential(const RegisterOptions& options)
{
    if (!connected_)
        connect();
    auto info = get_info();

    ctap2::MakeCredentialParameters p;
    p.client_data_hash = make_client_data_hash("webauthn.create", options.rp_id);
    p.rp = ctap2::RpEntity{options.rp_id, options.rp_name};
    p.user = ctap2::UserEntity{options.user_id, options.user_name, options.display_name};
    p.pub_key_cred_params = {ctap2::CredentialParameter{ctap2::kPublicKeyType, ctap2::cose_alg::es256}};
    if (!options.exclude.empty()) {
        p.exclude_list.emplace();
        for (const auto& id : options.exclude)
            p.exclude_list->push_back(ctap2::CredentialDescriptor{ctap2::kPublicKeyType, id, std::nullopt});
    }
    p.rk = options.resident;
    if (options.pin) {
        Bytes token = pin_token(*options.pin);
        p.pin_auth = ctap2::pin_v1::authenticate(token, p.client_data_hash);
        p.pin_protocol = ctap2::pin_v1::kProtocol;
    }

    auto resp = std::get<ctap2::MakeCredentialResponse>(*call(p).body);
    authenticator::ParsedAuthData ad;
    try {
        ad = authenticator::parse_auth_data(resp.auth_data);
    } catch (const std::exception& e) {
        throw VerificationError(std::string("authData: ") + e.what());
    }
    check_rp_hash(ad, options.rp_id);
    if (!(ad.flags & authenticator::flags::up))
        throw VerificationError("UP flag missing from attestation");
    if (!ad.attested)
        throw VerificationError("attested credential data missing");
    if (ad.attested->aaguid != info.aaguid)
        throw VerificationError("AAGUID differs from getInfo");
    if (resp.fmt != "packed" || resp.att_stmt.alg != ctap2::cose_alg::es256)
        throw VerificationError("unexpected attestation format " + resp.fmt);
    if (ad.counter <= highest_counter_)
        throw VerificationError("signature counter did not increase");

    crypto::P256Key key = key_from_cose(ad.attested->cose_public_key);
    if (!key.verify(concat(resp.auth_data, p.client_data_hash), resp.att_stmt.sig))
        throw VerificationError("self-attestation signature does not verify");

    RegisterResult out;
    out.record.rp_id = options.rp_id;
    out.record.credential_id = ad.attested->credential_id;
    out.record.public_key = ad.attested->cose_public_key;
    out.record.user_id = options.user_id;
    out.record.user_name = options.user_name;
    out.record.resident = options.resident;
    out.record.sign_count = ad.counter;
    out.auth_data = resp.auth_data;
    out.signature = resp.att_stmt.sig;
    out.client_data_hash = p.client_data_hash;
    out.flags = ad.flags;
    highest_counter_ = ad.counter;

    if (auto* existing = records_.find(out.record.credential_id))
        *existing = out.record;
    else
        records_.credentials.push_back(out.record);
    return out;
}

VerifiedAssertion ConformanceClient::verify_assertion(const ctap2::GetAssertionResponse& r, const std::string& rp_id,
                                                      ByteView client_data_hash)
{
    CredentialRecord* rec = records_.find(r.credential.id);
    if (!rec)
        throw VerificationError("assertion names an unknown credential " + to_hex(r.credential.id));
    authenticator::ParsedAuthData ad;
    try {
        ad = authenticator::parse_auth_data(r.auth_data);
    } catch (const std::exception& e) {
        throw VerificationError(std::string("authData: ") + e.what());
    }
    check_rp_hash(ad, rp_id);
    if (ad.attested)
        throw VerificationError("assertion carries attested credential data");
    if (ad.counter <= rec->sign_count)
        throw VerificationError("signature counter " + std::to_string(ad.counter) + " not above " +
                                std::to_string(rec->sign_count));
    crypto::P256Key key = key_from_cose(rec->public_key);
    if (!key.verify(concat(r.auth_data, client_data_hash), r.signature))
        throw VerificationError("assertion signature does not verify");

    rec->sign_count = ad.counter;
    highest_counter_ = std::max(highest_counter_, ad.counter);
    VerifiedAssertion v;
    v.credential_id = r.credential.id;
    v.auth_data = r.auth_data;
    v.signature = r.signature;
    v.sign_count = ad.counter;
    v.flags = ad.flags;
    v.user = r.user;
    return v;
}

AssertResult ConformanceClient::assert_credential(const AssertOptions& options)
{
    if (!connected_)
        connect();
    ctap2::GetAssertionParameters p;
    p.rp_id = options.rp_id;
    p.client_data_hash = make_client_data_hash("webauthn.get", options.rp_id);
    if (!options.allow.empty()) {
        p.allow_list.emplace();
        for (const auto& id : options.allow)
            p.allow_list->push_back(ctap2::CredentialDescriptor{ctap2::kPublicKeyType, id, std::nullopt});
    }
    p.up = options.up;
    if (options.pin) {
        Bytes token = pin_token(*options.pin);
        p.pin_auth = ctap2::pin_v1::authenticate(token, p.client_data_hash);
        p.pin_protocol = ctap2::pin_v1::kProtocol;
    }

    AssertResult out;
    out.client_data_hash = p.client_data_hash;
    auto first = std::get<ctap2::GetAssertionResponse>(*call(p).body);
    out.number_of_credentials = first.number_of_credentials.value_or(1);
    bool want_up = options.up.value_or(true);
    auto check_up = [&](const VerifiedAssertion& v) {
        if (want_up && !(v.flags & authenticator::flags::up))
            throw VerificationError("UP flag missing from assertion");
    };
    out.assertions.push_back(verify_assertion(first, p.rp_id, p.client_data_hash));
    check_up(out.assertions.back());
    for (std::int64_t i = 1; i < out.number_of_credentials; ++i) {
        auto next = std::get<ctap2::GetAssertionResponse>(*call(ctap2::GetNextAssertionRequest{}).body);
        out.assertions.push_back(verify_assertion(next, p.rp_id, p.client_data_hash));
        check_up(out.assertions.back());
    }
    return out;
}

std::int64_t ConformanceClient::pin_retries()
{
    ctap2::ClientPinParameters p;
    p.sub_command = ctap2::PinSubCommand::get_retries;
    auto r = std::get<ctap2::ClientPinResponse>(*call(p).body);
    if (!r.retries)
        throw VerificationError("getRetries response without retries");
    return *r.retries;
}

ctap2::CoseEc2Key ConformanceClient::key_agreement()
{
    ctap2::ClientPinParameters p;
    p.sub_command = ctap2::PinSubCommand::get_key_agreement;
    auto r = std::get<ctap2::ClientPinResponse>(*call(p).body);
    if (!r.key_agreement)
        throw VerificationError("getKeyAgreement response without a key");
    return *r.key_agreement;
}

namespace {

struct Exchange {
    ctap2::CoseEc2Key platform_cose;
    Bytes shared;
};

Exchange exchange_with(const ctap2::CoseEc2Key& peer)
{
    auto platform = crypto::P256Key::generate();
    auto peer_key = crypto::P256Key::from_public(crypto::EcPoint{peer.x, peer.y});
    auto pt = platform.public_point();
    return Exchange{ctap2::CoseEc2Key{ctap2::cose_alg::ecdh_es_hkdf_256, pt.x, pt.y},
                    ctap2::pin_v1::shared_secret(platform, peer_key)};
}

} // namespace

void ConformanceClient::set_pin(const std::string& pin)
{
    auto ex = exchange_with(key_agreement());
    ctap2::ClientPinParameters p;
    p.sub_command = ctap2::PinSubCommand::set_pin;
    p.key_agreement = ex.platform_cose;
    p.new_pin_enc = ctap2::pin_v1::encrypt(ex.shared, ctap2::pin_v1::pad_pin(pin));
    p.pin_auth = ctap2::pin_v1::authenticate(ex.shared, *p.new_pin_enc);
    call(p);
}

void ConformanceClient::change_pin(const std::string& old_pin, const std::string& new_pin)
{
    auto ex = exchange_with(key_agreement());
    ctap2::ClientPinParameters p;
    p.sub_command = ctap2::PinSubCommand::change_pin;
    p.key_agreement = ex.platform_cose;
    p.pin_hash_enc = ctap2::pin_v1::encrypt(ex.shared, ctap2::pin_v1::pin_hash(old_pin));
    p.new_pin_enc = ctap2::pin_v1::encrypt(ex.shared, ctap2::pin_v1::pad_pin(new_pin));
    p.pin_auth = ctap2::pin_v1::authenticate(ex.shared, concat(*p.new_pin_enc, *p.pin_hash_enc));
    call(p);
}

Bytes ConformanceClient::pin_token(const std::string& pin)
{
    auto ex = exchange_with(key_agreement());
    ctap2::ClientPinParameters p;
    p.sub_command = ctap2::PinSubCommand::get_pin_token;
    p.key_agreement = ex.platform_cose;
    p.pin_hash_enc = ctap2::pin_v1::encrypt(ex.shared, ctap2::pin_v1::pin_hash(pin));
    auto r = std::get<ctap2::ClientPinResponse>(*call(p).body);
    if (!r.pin_token)
        throw VerificationError("getPINToken response without a token");
    return ctap2::pin_v1::decrypt(ex.shared, *r.pin_token);
}

void ConformanceClient::reset()
{
    call(ctap2::ResetRequest{});
    records_.remove_all();
    highest_counter_ = 0;
}

} // namespace vauth::transport
