#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "authenticator/authenticator.hpp"
#include "common/bytes.hpp"
#include "storage/store.hpp"

namespace vauth::transport {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TransportKind { loopback, socket };
enum class ProviderKind { software, tpm };
enum class PolicyMode { auto_approve, auto_deny, scripted, interactive };

struct CliConfig {
    std::filesystem::path storage_path = "vauth-store.json";
    storage::Backend backend = storage::Backend::plaintext;
    std::optional<std::string> storage_password;
    unsigned kdf_iterations = storage::kDefaultKdfIterations;
    bool resident_default = true;
    authenticator::UvMode uv_mode = authenticator::UvMode::pin;
    Bytes aaguid = Bytes(16, 0);

    TransportKind transport = TransportKind::socket;
    std::filesystem::path socket_path = "vauth.sock";

    std::filesystem::path log_dir = "logs";
    bool log_stdout = true;

    ProviderKind provider = ProviderKind::software;
    std::filesystem::path tpm_dir = "tpm";
    std::string tpm_user = "vauth";
    std::string tpm_password = "vauth";

    PolicyMode policy = PolicyMode::auto_approve;
    std::vector<bool> policy_script;
    std::chrono::milliseconds policy_delay{0};

    std::chrono::milliseconds keepalive_interval{100};
    std::chrono::milliseconds request_timeout{30000};
};

/// Sets one key; throws ConfigError for unknown keys and bad values.
void apply_setting(CliConfig& config, std::string_view key, std::string_view value);

/// Flat key=value lines; '#' starts a comment; blank lines are ignored.
CliConfig parse_config(std::string_view text, CliConfig base = {});
CliConfig load_config(const std::filesystem::path& path, CliConfig base = {});

/// Every accepted key, in documentation order.
std::vector<std::string> config_keys();

} // namespace vauth::transport
