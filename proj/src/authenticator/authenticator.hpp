#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "authenticator/credential_source.hpp"
#include "authenticator/presence.hpp"
#include "common/log.hpp"
#include "crypto/credential_wrapper.hpp"
#include "crypto/es256_provider.hpp"
#include "crypto/provider.hpp"
#include "ctap2/messages.hpp"
#include "storage/store.hpp"

namespace vauth::authenticator {

enum class UvMode {
    pin,      // uv established by pinAuth from a PIN token
    password, // uv established by the policy's password prompt
};

struct AuthenticatorConfig {
    Bytes aaguid = Bytes(16, 0);
    bool resident_default = true;
    UvMode uv_mode = UvMode::pin;
    /// Checks a password in password mode. Required for options.uv there.
    std::function<bool(std::string_view)> password_verifier;
    std::chrono::milliseconds assertion_timeout{30000};
};

/// The six CTAP2 authenticator commands over one store and provider
/// registry. Not thread-safe; the transaction layer runs one request at a time.
class Authenticator {
public:
    Authenticator(storage::Store& store, crypto::ProviderRegistry& providers, PresencePolicy& presence,
                  AuthenticatorConfig config = {}, Logger& logger = null_logger());

    /// Command byte || CBOR in, status byte || CBOR out. Never throws.
    Bytes process_cbor(ByteView request, RequestContext& ctx = null_context());

    ctap2::GetInfoResponse get_info() const;
    ctap2::MakeCredentialResponse make_credential(const ctap2::MakeCredentialParameters& p,
                                                  RequestContext& ctx = null_context());
    ctap2::GetAssertionResponse get_assertion(const ctap2::GetAssertionParameters& p,
                                              RequestContext& ctx = null_context());
    ctap2::GetAssertionResponse get_next_assertion(RequestContext& ctx = null_context());
    ctap2::ClientPinResponse client_pin(const ctap2::ClientPinParameters& p);
    ctap2::ResetResponse reset(RequestContext& ctx = null_context());

    /// Current key-agreement public key, for tests observing rotation.
    crypto::EcPoint key_agreement_point() const;
    void set_presence_policy(PresencePolicy& presence) { presence_ = &presence; }
    const AuthenticatorConfig& config() const { return config_; }

private:
    struct Candidate {
        CredentialSource source;
        Bytes credential_id;
        bool resident = false;
    };
    struct Iteration {
        std::vector<Candidate> candidates;
        std::size_t cursor = 0;
        std::chrono::steady_clock::time_point started;
        Bytes client_data_hash;
        std::uint8_t flags = 0;
    };

    void regenerate_key_agreement();
    Bytes decrypt_shared(const ctap2::ClientPinParameters& p) const;
    bool verify_pin_auth(ByteView pin_auth, std::optional<std::int64_t> protocol, ByteView client_data_hash) const;
    bool check_uv(const std::optional<bool>& uv_option, const std::optional<Bytes>& pin_auth,
                  const std::optional<std::int64_t>& pin_protocol, ByteView client_data_hash,
                  const PresencePrompt& prompt, RequestContext& ctx);
    void require_presence(const PresencePrompt& prompt, RequestContext& ctx);
    bool excluded(const ctap2::MakeCredentialParameters& p) const;
    std::optional<CredentialSource> unwrap_source(ByteView credential_id) const;
    std::vector<Candidate> find_candidates(const ctap2::GetAssertionParameters& p) const;
    ctap2::GetAssertionResponse assert_with(const Candidate& c, ByteView client_data_hash, std::uint8_t flags,
                                            std::optional<std::int64_t> number_of_credentials);
    void check_pin_usable() const;
    void consume_retry();
    void pin_mismatch();
    void set_new_pin(const ctap2::ClientPinParameters& p, const Bytes& shared);
    void log(const std::string& record) { logger_.log(LogSink::auth, record); }

    storage::Store& store_;
    crypto::ProviderRegistry& providers_;
    PresencePolicy* presence_;
    AuthenticatorConfig config_;
    Logger& logger_;
    crypto::AesCredentialWrapper wrapper_;

    crypto::Es256Provider pin_provider_;
    std::shared_ptr<const crypto::Es256PrivateKey> key_agreement_;
    Bytes pin_token_;
    std::optional<Iteration> iteration_;
};

} // namespace vauth::authenticator
