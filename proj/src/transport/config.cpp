#include "transport/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace vauth::transport {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

bool parse_bool(std::string_view key, std::string_view v)
{
    if (v == "true" || v == "yes" || v == "on" || v == "1")
        return true;
    if (v == "false" || v == "no" || v == "off" || v == "0")
        return false;
    throw ConfigError("invalid boolean for " + std::string(key) + ": '" + std::string(v) + "'");
}

std::uint64_t parse_uint(std::string_view key, std::string_view v)
{
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("invalid number for " + std::string(key) + ": '" + std::string(v) + "'");
    return out;
}

std::chrono::milliseconds parse_ms(std::string_view key, std::string_view v)
{
    return std::chrono::milliseconds(parse_uint(key, v));
}

using Setter = std::function<void(CliConfig&, std::string_view key, std::string_view value)>;

const std::vector<std::pair<std::string, Setter>>& setters()
{
    static const std::vector<std::pair<std::string, Setter>> table = {
        {"storage_path", [](CliConfig& c, auto, auto v) { c.storage_path = std::string(v); }},
        {"storage_backend",
         [](CliConfig& c, auto k, auto v) {
             if (v == "plaintext")
                 c.backend = storage::Backend::plaintext;
             else if (v == "encrypted")
                 c.backend = storage::Backend::encrypted;
             else
                 throw ConfigError(std::string(k) + " must be plaintext or encrypted");
         }},
        {"storage_password", [](CliConfig& c, auto, auto v) { c.storage_password = std::string(v); }},
        {"kdf_iterations",
         [](CliConfig& c, auto k, auto v) {
             auto n = parse_uint(k, v);
             if (n == 0 || n > 100000000)
                 throw ConfigError(std::string(k) + " out of range");
             c.kdf_iterations = static_cast<unsigned>(n);
         }},
        {"resident_default", [](CliConfig& c, auto k, auto v) { c.resident_default = parse_bool(k, v); }},
        {"uv_mode",
         [](CliConfig& c, auto k, auto v) {
             if (v == "pin")
                 c.uv_mode = authenticator::UvMode::pin;
             else if (v == "password")
                 c.uv_mode = authenticator::UvMode::password;
             else
                 throw ConfigError(std::string(k) + " must be pin or password");
         }},
        {"aaguid",
         [](CliConfig& c, auto k, auto v) {
             Bytes b;
             try {
                 b = from_hex(v);
             } catch (const std::exception&) {
                 throw ConfigError(std::string(k) + " must be 32 hex digits");
             }
             if (b.size() != 16)
                 throw ConfigError(std::string(k) + " must be 32 hex digits");
             c.aaguid = b;
         }},
        {"transport",
         [](CliConfig& c, auto k, auto v) {
             if (v == "loopback")
                 c.transport = TransportKind::loopback;
             else if (v == "socket")
                 c.transport = TransportKind::socket;
             else
                 throw ConfigError(std::string(k) + " must be loopback or socket");
         }},
        {"socket_path", [](CliConfig& c, auto, auto v) { c.socket_path = std::string(v); }},
        {"log_dir", [](CliConfig& c, auto, auto v) { c.log_dir = std::string(v); }},
        {"log_stdout", [](CliConfig& c, auto k, auto v) { c.log_stdout = parse_bool(k, v); }},
        {"provider",
         [](CliConfig& c, auto k, auto v) {
             if (v == "software")
                 c.provider = ProviderKind::software;
             else if (v == "tpm")
                 c.provider = ProviderKind::tpm;
             else
                 throw ConfigError(std::string(k) + " must be software or tpm");
         }},
        {"tpm_dir", [](CliConfig& c, auto, auto v) { c.tpm_dir = std::string(v); }},
        {"tpm_user", [](CliConfig& c, auto, auto v) { c.tpm_user = std::string(v); }},
        {"tpm_password", [](CliConfig& c, auto, auto v) { c.tpm_password = std::string(v); }},
        {"policy",
         [](CliConfig& c, auto k, auto v) {
             if (v == "auto-approve")
                 c.policy = PolicyMode::auto_approve;
             else if (v == "auto-deny")
                 c.policy = PolicyMode::auto_deny;
             else if (v == "scripted")
                 c.policy = PolicyMode::scripted;
             else if (v == "interactive")
                 c.policy = PolicyMode::interactive;
             else
                 throw ConfigError(std::string(k) + " must be auto-approve, auto-deny, scripted or interactive");
         }},
        {"policy_script",
         [](CliConfig& c, auto k, auto v) {
             c.policy_script.clear();
             std::string s(v);
             std::stringstream ss(s);
             std::string item;
             while (std::getline(ss, item, ','))
                 if (!trim(item).empty())
                     c.policy_script.push_back(parse_bool(k, trim(item)));
         }},
        {"policy_delay_ms", [](CliConfig& c, auto k, auto v) { c.policy_delay = parse_ms(k, v); }},
        {"keepalive_interval_ms",
         [](CliConfig& c, auto k, auto v) {
             c.keepalive_interval = parse_ms(k, v);
             if (c.keepalive_interval.count() == 0)
                 throw ConfigError(std::string(k) + " must be positive");
         }},
        {"request_timeout_ms",
         [](CliConfig& c, auto k, auto v) {
             c.request_timeout = parse_ms(k, v);
             if (c.request_timeout.count() == 0)
                 throw ConfigError(std::string(k) + " must be positive");
         }},
    };
    return table;
}

} // namespace

std::vector<std::string> config_keys()
{
    std::vector<std::string> keys;
    for (const auto& [k, _] : setters())
        keys.push_back(k);
    return keys;
}

void apply_setting(CliConfig& config, std::string_view key, std::string_view value)
{
    for (const auto& [k, set] : setters()) {
        if (k == key) {
            set(config, key, value);
            return;
        }
    }
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

CliConfig parse_config(std::string_view text, CliConfig base)
{
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        try {
            apply_setting(base, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

CliConfig load_config(const std::filesystem::path& path, CliConfig base)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

} // namespace vauth::transport
