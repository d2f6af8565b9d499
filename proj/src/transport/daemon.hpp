#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>

#include "authenticator/authenticator.hpp"
#include "crypto/provider.hpp"
#include "ctaphid/layer.hpp"
#include "storage/store.hpp"
#include "transport/config.hpp"
#include "transport/transport.hpp"

namespace vauth::transport {

/// Presence policy selected by the config's policy mode.
std::unique_ptr<authenticator::PresencePolicy> make_policy(const CliConfig& config);

/// The configured provider for ES256 (software or TPM-backed).
std::shared_ptr<crypto::CryptoProvider> make_provider(const CliConfig& config);

/// Storage password for the encrypted backend: the configured one, else
/// asked from the policy. nullopt for the plaintext backend.
/// Throws ConfigError when an encrypted store has no password.
std::optional<std::string> resolve_storage_password(const CliConfig& config,
                                                    authenticator::PresencePolicy& policy);

/// Store, providers, authenticator and CTAPHID layer wired together; reports in, reports out.
class VirtualDevice {
public:
    VirtualDevice(const CliConfig& config, authenticator::PresencePolicy& policy, Logger& logger,
                  ctaphid::ReportSink sink, std::optional<std::string> storage_password,
                  std::shared_ptr<crypto::CryptoProvider> provider = nullptr);
    ~VirtualDevice();

    void handle_report(ByteView report) { layer_->handle_report(report); }

    storage::Store& store() { return *store_; }
    crypto::ProviderRegistry& providers() { return providers_; }
    authenticator::Authenticator& authenticator() { return *authenticator_; }
    ctaphid::CtapHidLayer& layer() { return *layer_; }

private:
    std::unique_ptr<storage::Store> store_;
    crypto::ProviderRegistry providers_;
    std::unique_ptr<authenticator::Authenticator> authenticator_;
    std::unique_ptr<ctaphid::CtapHidLayer> layer_;
};

/// Serves one VirtualDevice over the configured transport until stop(),
/// a shutdown request from the policy, or transport close.
class Daemon {
public:
    /// Opens the store (asking for the password when needed) and binds the
    /// transport. Throws on bad config, wrong password or bind failure.
    Daemon(CliConfig config, authenticator::PresencePolicy& policy, Logger& logger,
           std::shared_ptr<crypto::CryptoProvider> provider = nullptr);
    ~Daemon();
    Daemon(const Daemon&) = delete;
    Daemon& operator=(const Daemon&) = delete;

    void run();
    /// Async-signal-safe.
    void stop() noexcept { stop_.store(true); }

    /// The host end of a loopback daemon; null for other transports or after the first call.
    std::unique_ptr<Transport> take_loopback_client() { return std::move(loopback_client_); }

    VirtualDevice& device() { return *device_; }
    const CliConfig& config() const { return config_; }

private:
    CliConfig config_;
    authenticator::PresencePolicy& policy_;
    Logger& logger_;
    std::unique_ptr<Transport> transport_;
    std::unique_ptr<Transport> loopback_client_;
    std::unique_ptr<VirtualDevice> device_;
    std::atomic<bool> stop_{false};
};

} // namespace vauth::transport
