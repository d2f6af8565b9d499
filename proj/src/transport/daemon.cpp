#include "transport/daemon.hpp"

#include "crypto/es256_provider.hpp"
#include "tpm/tpm_es256_provider.hpp"
#include "transport/socket_transport.hpp"
#include "transport/terminal_policy.hpp"

namespace vauth::transport {

using authenticator::PresencePolicy;

std::unique_ptr<PresencePolicy> make_policy(const CliConfig& config)
{
    switch (config.policy) {
    case PolicyMode::auto_approve:
        return std::make_unique<authenticator::AutoApprovePolicy>(config.storage_password);
    case PolicyMode::auto_deny:
        return std::make_unique<authenticator::AutoDenyPolicy>();
    case PolicyMode::scripted:
        return std::make_unique<authenticator::ScriptedPolicy>(config.policy_script, config.policy_delay);
    case PolicyMode::interactive:
        return std::make_unique<TerminalPolicy>();
    }
    throw ConfigError("unknown policy mode");
}

std::shared_ptr<crypto::CryptoProvider> make_provider(const CliConfig& config)
{
    if (config.provider == ProviderKind::tpm)
        return std::make_shared<tpm::TpmEs256Provider>(config.tpm_dir, config.tpm_user, config.tpm_password);
    return std::make_shared<crypto::Es256Provider>();
}

std::optional<std::string> resolve_storage_password(const CliConfig& config, PresencePolicy& policy)
{
    if (config.backend != storage::Backend::encrypted)
        return std::nullopt;
    if (config.storage_password && !config.storage_password->empty())
        return config.storage_password;
    auto pw = policy.request_password(authenticator::PresencePrompt{"unlockStorage", "", ""},
                                      authenticator::null_context());
    if (!pw || pw->empty())
        throw ConfigError("encrypted storage needs a password");
    return pw;
}

VirtualDevice::VirtualDevice(const CliConfig& config, PresencePolicy& policy, Logger& logger,
                             ctaphid::ReportSink sink, std::optional<std::string> storage_password,
                             std::shared_ptr<crypto::CryptoProvider> provider)
{
    storage::StoreOptions so;
    so.path = config.storage_path;
    so.backend = config.backend;
    so.password = storage_password.value_or("");
    so.kdf_iterations = config.kdf_iterations;
    store_ = storage::Store::open_or_init(so);

    providers_.add(provider ? std::move(provider) : make_provider(config));

    authenticator::AuthenticatorConfig ac;
    ac.aaguid = config.aaguid;
    ac.resident_default = config.resident_default;
    ac.uv_mode = config.uv_mode;
    storage::Store* store = store_.get();
    ac.password_verifier = [store](std::string_view pw) { return store->check_password(pw); };
    authenticator_ = std::make_unique<authenticator::Authenticator>(*store_, providers_, policy, ac, logger);

    ctaphid::LayerConfig lc;
    lc.keepalive_interval = config.keepalive_interval;
    lc.request_timeout = config.request_timeout;
    auto* auth = authenticator_.get();
    layer_ = std::make_unique<ctaphid::CtapHidLayer>(
        [auth](ByteView request, authenticator::RequestContext& ctx) { return auth->process_cbor(request, ctx); },
        std::move(sink), lc, logger);
}

VirtualDevice::~VirtualDevice() { layer_.reset(); }

Daemon::Daemon(CliConfig config, PresencePolicy& policy, Logger& logger,
               std::shared_ptr<crypto::CryptoProvider> provider)
    : config_(std::move(config)), policy_(policy), logger_(logger)
{
    auto password = resolve_storage_password(config_, policy_);
    if (config_.transport == TransportKind::loopback) {
        auto [device_end, host_end] = make_loopback_pair();
        transport_ = std::move(device_end);
        loopback_client_ = std::move(host_end);
    } else {
        transport_ = std::make_unique<SocketServerTransport>(config_.socket_path);
    }
    Transport* t = transport_.get();
    try {
        device_ = std::make_unique<VirtualDevice>(
            config_, policy_, logger_, [t](const hid::Report& r) { t->write(r); }, password, std::move(provider));
    } catch (...) {
        transport_->close();
        throw;
    }
    logger_.log(LogSink::debug, "daemon ready on " + (config_.transport == TransportKind::loopback
                                                          ? std::string("loopback")
                                                          : config_.socket_path.string()));
}

Daemon::~Daemon()
{
    if (transport_)
        transport_->close();
    device_.reset();
}

void Daemon::run()
{
    logger_.log(LogSink::debug, "serving");
    try {
        while (!stop_.load() && !policy_.shutdown_requested()) {
            auto report = transport_->read(std::chrono::milliseconds(100));
            if (report)
                device_->handle_report(*report);
        }
    } catch (const TransportClosed&) {
        logger_.log(LogSink::debug, "transport closed");
    }
    device_->layer().wait_idle(std::chrono::milliseconds(500));
    logger_.log(LogSink::debug, "shutting down");
}

} // namespace vauth::transport
