#include "authenticator/authenticator.hpp"

#include <algorithm>

#include "authenticator/auth_data.hpp"
#include "ctap2/pin_protocol.hpp"

namespace vauth::authenticator {

using ctap2::CtapError;
using ctap2::Status;
namespace pin_v1 = ctap2::pin_v1;

namespace {

std::string user_label(const ctap2::UserEntity& u)
{
    if (u.name)
        return *u.name;
    if (u.display_name)
        return *u.display_name;
    return to_hex(u.id);
}

} // namespace

Authenticator::Authenticator(storage::Store& store, crypto::ProviderRegistry& providers, PresencePolicy& presence,
                             AuthenticatorConfig config, Logger& logger)
    : store_(store), providers_(providers), presence_(&presence), config_(std::move(config)), logger_(logger)
{
    if (config_.aaguid.size() != 16)
        throw std::invalid_argument("aaguid must be 16 bytes");
    regenerate_key_agreement();
    pin_token_ = crypto::random_bytes(pin_v1::kTokenSize);
}

void Authenticator::regenerate_key_agreement()
{
    auto pair = pin_provider_.generate();
    key_agreement_ = std::static_pointer_cast<const crypto::Es256PrivateKey>(pair.private_key);
}

crypto::EcPoint Authenticator::key_agreement_point() const { return key_agreement_->key().public_point(); }

Bytes Authenticator::process_cbor(ByteView request, RequestContext& ctx)
{
    std::string name = request.empty() ? "empty" : "0x" + to_hex(request.first(1));
    try {
        ctap2::Request req = ctap2::decode_request(request);
        ctap2::Command cmd = ctap2::command_of(req);
        name = ctap2::command_name(cmd);
        if (cmd != ctap2::Command::get_next_assertion)
            iteration_.reset();

        Bytes out;
        if (auto* p = std::get_if<ctap2::MakeCredentialParameters>(&req))
            out = ctap2::encode_response(make_credential(*p, ctx));
        else if (auto* p = std::get_if<ctap2::GetAssertionParameters>(&req))
            out = ctap2::encode_response(get_assertion(*p, ctx));
        else if (std::holds_alternative<ctap2::GetInfoRequest>(req))
            out = ctap2::encode_response(get_info());
        else if (auto* p = std::get_if<ctap2::ClientPinParameters>(&req))
            out = ctap2::encode_response(client_pin(*p));
        else if (std::holds_alternative<ctap2::ResetRequest>(req))
            out = ctap2::encode_response(reset(ctx));
        else
            out = ctap2::encode_response(get_next_assertion(ctx));
        log(name + " -> OK");
        return out;
    } catch (const CtapError& e) {
        std::string status = ctap2::status_name(e.status());
        log(name + " -> " + status + (status == e.what() ? "" : ": " + std::string(e.what())));
        return ctap2::encode_status(e.status());
    } catch (const std::exception& e) {
        log(name + " -> CTAP1_ERR_OTHER: " + e.what());
        return ctap2::encode_status(Status::other);
    }
}

ctap2::GetInfoResponse Authenticator::get_info() const
{
    ctap2::GetInfoResponse r;
    r.versions = {"FIDO_2_0"};
    r.aaguid = config_.aaguid;
    r.options = {{"rk", true}, {"up", true}, {"clientPin", store_.pin_record().has_value()}};
    if (config_.uv_mode == UvMode::password)
        r.options["uv"] = true;
    r.max_msg_size = 7609;
    r.pin_protocols = std::vector<std::int64_t>{pin_v1::kProtocol};
    r.algorithms = providers_.algorithms();
    return r;
}

bool Authenticator::verify_pin_auth(ByteView pin_auth, std::optional<std::int64_t> protocol,
                                    ByteView client_data_hash) const
{
    if (!protocol)
        throw CtapError(Status::missing_parameter, "pinAuth without pinProtocol");
    if (*protocol != pin_v1::kProtocol)
        throw CtapError(Status::invalid_parameter, "unsupported pinProtocol");
    if (!store_.pin_record())
        throw CtapError(Status::pin_not_set);
    if (pin_auth.size() != ctap2::kPinAuthSize)
        return false;
    return crypto::constant_time_equal(pin_v1::authenticate(pin_token_, client_data_hash), pin_auth);
}

bool Authenticator::check_uv(const std::optional<bool>& uv_option, const std::optional<Bytes>& pin_auth,
                             const std::optional<std::int64_t>& pin_protocol, ByteView client_data_hash,
                             const PresencePrompt& prompt, RequestContext& ctx)
{
    if (pin_auth) {
        if (!verify_pin_auth(*pin_auth, pin_protocol, client_data_hash))
            throw CtapError(Status::pin_auth_invalid);
        return true;
    }
    if (uv_option.value_or(false)) {
        if (config_.uv_mode != UvMode::password || !config_.password_verifier)
            throw CtapError(Status::invalid_option, "built-in user verification is not available");
        ctx.set_status(KeepAliveStatus::up_needed);
        auto password = presence_->request_password(prompt, ctx);
        ctx.set_status(KeepAliveStatus::processing);
        if (ctx.cancelled())
            throw CtapError(Status::keepalive_cancel);
        if (!password || !config_.password_verifier(*password))
            throw CtapError(Status::operation_denied, "user verification failed");
        return true;
    }
    return false;
}

void Authenticator::require_presence(const PresencePrompt& prompt, RequestContext& ctx)
{
    ctx.set_status(KeepAliveStatus::up_needed);
    bool approved = false;
    try {
        approved = presence_->confirm_presence(prompt, ctx);
    } catch (...) {
        ctx.set_status(KeepAliveStatus::processing);
        throw;
    }
    ctx.set_status(KeepAliveStatus::processing);
    if (ctx.cancelled())
        throw CtapError(Status::keepalive_cancel);
    if (!approved)
        throw CtapError(Status::operation_denied, "user presence denied for " + describe(prompt));
}

std::optional<CredentialSource> Authenticator::unwrap_source(ByteView credential_id) const
{
    auto plain = wrapper_.unwrap(store_.wrap_key(), credential_id);
    if (!plain)
        return std::nullopt;
    try {
        CredentialSource s = deserialize_credential_source(*plain);
        s.credential_id.assign(credential_id.begin(), credential_id.end());
        return s;
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

bool Authenticator::excluded(const ctap2::MakeCredentialParameters& p) const
{
    if (!p.exclude_list)
        return false;
    std::vector<Bytes> ids;
    for (const auto& d : *p.exclude_list)
        ids.push_back(d.id);
    if (!store_.get_credential_source_by_rp(p.rp.id, &ids).empty())
        return true;
    for (const auto& d : *p.exclude_list) {
        auto s = unwrap_source(d.id);
        if (s && s->rp_id == p.rp.id)
            return true;
    }
    return false;
}

ctap2::MakeCredentialResponse Authenticator::make_credential(const ctap2::MakeCredentialParameters& p,
                                                             RequestContext& ctx)
{
    PresencePrompt prompt{"makeCredential", p.rp.id, user_label(p.user)};
    log("makeCredential rp=" + p.rp.id + " user=" + prompt.user_name +
        " rk=" + (p.rk ? (*p.rk ? "true" : "false") : "default"));

    if (excluded(p))
        throw CtapError(Status::credential_excluded);

    crypto::CryptoProvider* provider = nullptr;
    for (const auto& cp : p.pub_key_cred_params) {
        if (cp.type != ctap2::kPublicKeyType)
            continue;
        if ((provider = providers_.find(cp.alg)))
            break;
    }
    if (!provider)
        throw CtapError(Status::unsupported_algorithm);

    if (config_.uv_mode == UvMode::pin && p.uv.value_or(false) && !p.pin_auth)
        throw CtapError(Status::invalid_option, "uv option requires pinAuth in PIN mode");
    if (store_.pin_record() && !p.pin_auth)
        throw CtapError(Status::pin_required);
    bool uv = check_uv(p.uv, p.pin_auth, p.pin_protocol, p.client_data_hash, prompt, ctx);

    require_presence(prompt, ctx);

    crypto::KeyPair pair = provider->generate();
    bool resident = p.rk.value_or(config_.resident_default);
    std::uint64_t counter = store_.increment_counter();

    CredentialSource source;
    source.key_handle = pair.private_key->encoded();
    source.rp_id = p.rp.id;
    source.rp_name = p.rp.name;
    source.user = p.user;
    source.alg = provider->algorithm();
    source.created_ordinal = counter;

    Bytes credential_id;
    if (resident) {
        credential_id = crypto::random_bytes(16);
        source.credential_id = credential_id;
        store_.add_credential_source(p.rp.id, storage::StoredCredential{credential_id, serialize(source)});
    } else {
        credential_id = wrapper_.wrap(store_.wrap_key(), serialize(source));
    }

    std::uint8_t f = flags::up | (uv ? flags::uv : 0);
    Bytes auth_data = build_auth_data(
        p.rp.id, f, static_cast<std::uint32_t>(counter),
        AttestedCredentialData{config_.aaguid, credential_id, cbor::encode(pair.public_key->cose())});

    ctap2::MakeCredentialResponse r;
    r.fmt = "packed";
    r.auth_data = auth_data;
    r.att_stmt.alg = provider->algorithm();
    r.att_stmt.sig = pair.private_key->sign(concat(auth_data, p.client_data_hash));
    log(std::string("makeCredential created ") + (resident ? "resident" : "wrapped") + " credential " +
        to_hex(credential_id).substr(0, 16) + " counter=" + std::to_string(counter));
    return r;
}

std::vector<Authenticator::Candidate> Authenticator::find_candidates(const ctap2::GetAssertionParameters& p) const
{
    std::vector<Candidate> out;
    std::vector<Bytes> ids;
    if (p.allow_list)
        for (const auto& d : *p.allow_list)
            ids.push_back(d.id);

    for (const auto& stored : store_.get_credential_source_by_rp(p.rp_id, p.allow_list ? &ids : nullptr)) {
        try {
            out.push_back(Candidate{deserialize_credential_source(stored.source), stored.id, true});
        } catch (const std::invalid_argument& e) {
            logger_.log(LogSink::auth, "skipping unreadable stored credential: " + std::string(e.what()));
        }
    }
    if (p.allow_list) {
        for (const auto& d : *p.allow_list) {
            bool seen = std::any_of(out.begin(), out.end(), [&](const Candidate& c) { return c.credential_id == d.id; });
            if (seen)
                continue;
            auto s = unwrap_source(d.id);
            if (s && s->rp_id == p.rp_id)
                out.push_back(Candidate{*s, d.id, false});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
        return a.source.created_ordinal > b.source.created_ordinal;
    });
    return out;
}

ctap2::GetAssertionResponse Authenticator::assert_with(const Candidate& c, ByteView client_data_hash,
                                                       std::uint8_t f,
                                                       std::optional<std::int64_t> number_of_credentials)
{
    crypto::CryptoProvider* provider = providers_.find(c.source.alg);
    if (!provider)
        throw CtapError(Status::unsupported_algorithm, "credential algorithm no longer registered");
    crypto::KeyPair pair = provider->load(c.source.key_handle);

    std::uint64_t counter = store_.increment_counter();
    Bytes auth_data = build_auth_data(c.source.rp_id, f, static_cast<std::uint32_t>(counter));

    ctap2::GetAssertionResponse r;
    r.credential.id = c.credential_id;
    r.auth_data = auth_data;
    r.signature = pair.private_key->sign(concat(auth_data, client_data_hash));
    if (c.resident)
        r.user = c.source.user;
    r.number_of_credentials = number_of_credentials;
    log("assertion with " + std::string(c.resident ? "resident" : "wrapped") + " credential " +
        to_hex(c.credential_id).substr(0, 16) + " counter=" + std::to_string(counter));
    return r;
}

ctap2::GetAssertionResponse Authenticator::get_assertion(const ctap2::GetAssertionParameters& p,
                                                         RequestContext& ctx)
{
    PresencePrompt prompt{"getAssertion", p.rp_id, ""};
    log("getAssertion rp=" + p.rp_id +
        " allowList=" + (p.allow_list ? std::to_string(p.allow_list->size()) : std::string("none")));

    if (config_.uv_mode == UvMode::pin && p.uv.value_or(false) && !p.pin_auth)
        throw CtapError(Status::invalid_option, "uv option requires pinAuth in PIN mode");

    auto candidates = find_candidates(p);
    if (!candidates.empty() && candidates.front().resident)
        prompt.user_name = user_label(candidates.front().source.user);
    bool uv = check_uv(p.uv, p.pin_auth, p.pin_protocol, p.client_data_hash, prompt, ctx);

    if (candidates.empty())
        throw CtapError(Status::no_credentials);

    bool up = p.up.value_or(true);
    if (up)
        require_presence(prompt, ctx);

    std::uint8_t f = (up ? flags::up : 0) | (uv ? flags::uv : 0);
    auto count = static_cast<std::int64_t>(candidates.size());
    auto r = assert_with(candidates.front(), p.client_data_hash, f, count);
    if (candidates.size() > 1)
        iteration_ = Iteration{std::move(candidates), 0, std::chrono::steady_clock::now(), p.client_data_hash, f};
    return r;
}

ctap2::GetAssertionResponse Authenticator::get_next_assertion(RequestContext&)
{
    if (!iteration_)
        throw CtapError(Status::not_allowed, "no assertion in progress");
    if (std::chrono::steady_clock::now() - iteration_->started > config_.assertion_timeout) {
        iteration_.reset();
        throw CtapError(Status::not_allowed, "assertion iteration timed out");
    }
    if (iteration_->cursor + 1 >= iteration_->candidates.size()) {
        iteration_.reset();
        throw CtapError(Status::not_allowed, "no more credentials");
    }
    ++iteration_->cursor;
    return assert_with(iteration_->candidates[iteration_->cursor], iteration_->client_data_hash, iteration_->flags,
                       std::nullopt);
}

Bytes Authenticator::decrypt_shared(const ctap2::ClientPinParameters& p) const
{
    auto platform = crypto::P256Key::from_public(crypto::EcPoint{p.key_agreement->x, p.key_agreement->y});
    return pin_v1::shared_secret(key_agreement_->key(), platform);
}

void Authenticator::check_pin_usable() const
{
    auto rec = store_.pin_record();
    if (!rec)
        throw CtapError(Status::pin_not_set);
    if (rec->retries <= 0)
        throw CtapError(Status::pin_blocked);
}

void Authenticator::consume_retry()
{
    auto rec = *store_.pin_record();
    rec.retries -= 1;
    store_.set_pin_record(rec);
}

void Authenticator::pin_mismatch()
{
    regenerate_key_agreement();
    int left = store_.pin_record()->retries;
    log("clientPIN mismatch, retries left " + std::to_string(left));
    if (left <= 0)
        throw CtapError(Status::pin_blocked);
    throw CtapError(Status::pin_invalid);
}

void Authenticator::set_new_pin(const ctap2::ClientPinParameters& p, const Bytes& shared)
{
    const Bytes& enc = *p.new_pin_enc;
    if (enc.size() < pin_v1::kPaddedPinSize || enc.size() % 16 != 0)
        throw CtapError(Status::invalid_parameter, "newPinEnc must be a multiple of 16 bytes, at least 64");
    Bytes padded = pin_v1::decrypt(shared, enc);
    auto end = std::find(padded.begin(), padded.end(), std::uint8_t{0});
    std::string pin(padded.begin(), end);
    crypto::cleanse(padded);
    if (pin.size() < pin_v1::kMinPinLength || pin.size() > pin_v1::kMaxPinLength)
        throw CtapError(Status::pin_policy_violation, "PIN must be 4 to 63 bytes");
    store_.set_pin_record(storage::PinRecord{pin_v1::pin_hash(pin), pin_v1::kMaxRetries});
}

ctap2::ClientPinResponse Authenticator::client_pin(const ctap2::ClientPinParameters& p)
{
    using ctap2::PinSubCommand;
    if (p.pin_protocol != pin_v1::kProtocol)
        throw CtapError(Status::invalid_parameter, "unsupported pinProtocol");
    ctap2::ClientPinResponse r;

    switch (p.sub_command) {
    case PinSubCommand::get_retries: {
        auto rec = store_.pin_record();
        r.retries = rec ? rec->retries : pin_v1::kMaxRetries;
        return r;
    }
    case PinSubCommand::get_key_agreement: {
        auto point = key_agreement_point();
        r.key_agreement = ctap2::CoseEc2Key{ctap2::cose_alg::ecdh_es_hkdf_256, point.x, point.y};
        return r;
    }
    case PinSubCommand::set_pin: {
        if (store_.pin_record())
            throw CtapError(Status::pin_auth_invalid, "PIN already set");
        Bytes shared = decrypt_shared(p);
        if (p.pin_auth->size() != ctap2::kPinAuthSize ||
            !crypto::constant_time_equal(pin_v1::authenticate(shared, *p.new_pin_enc), *p.pin_auth))
            throw CtapError(Status::pin_auth_invalid);
        set_new_pin(p, shared);
        log("clientPIN PIN set");
        return r;
    }
    case PinSubCommand::change_pin: {
        check_pin_usable();
        Bytes shared = decrypt_shared(p);
        if (p.pin_auth->size() != ctap2::kPinAuthSize ||
            !crypto::constant_time_equal(pin_v1::authenticate(shared, concat(*p.new_pin_enc, *p.pin_hash_enc)),
                                         *p.pin_auth))
            throw CtapError(Status::pin_auth_invalid);
        if (p.pin_hash_enc->size() != 16)
            throw CtapError(Status::invalid_parameter, "pinHashEnc must be 16 bytes");
        consume_retry();
        if (!crypto::constant_time_equal(pin_v1::decrypt(shared, *p.pin_hash_enc), store_.pin_record()->pin_hash))
            pin_mismatch();
        set_new_pin(p, shared);
        log("clientPIN PIN changed");
        return r;
    }
    case PinSubCommand::get_pin_token: {
        check_pin_usable();
        if (p.pin_hash_enc->size() != 16)
            throw CtapError(Status::invalid_parameter, "pinHashEnc must be 16 bytes");
        Bytes shared = decrypt_shared(p);
        consume_retry();
        if (!crypto::constant_time_equal(pin_v1::decrypt(shared, *p.pin_hash_enc), store_.pin_record()->pin_hash))
            pin_mismatch();
        auto rec = *store_.pin_record();
        rec.retries = pin_v1::kMaxRetries;
        store_.set_pin_record(rec);
        r.pin_token = pin_v1::encrypt(shared, pin_token_);
        log("clientPIN token issued");
        return r;
    }
    }
    throw CtapError(Status::invalid_parameter, "unknown subCommand");
}

ctap2::ResetResponse Authenticator::reset(RequestContext& ctx)
{
    require_presence(PresencePrompt{"reset", "", ""}, ctx);
    store_.reset_document();
    iteration_.reset();
    regenerate_key_agreement();
    pin_token_ = crypto::random_bytes(pin_v1::kTokenSize);
    log("reset: credentials, PIN and counter cleared, wrap key rotated");
    return {};
}

} // namespace vauth::authenticator
