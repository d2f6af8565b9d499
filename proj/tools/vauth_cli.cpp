// vauth: virtual FIDO2 authenticator daemon and conformance client.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vauth/vauth.h"

namespace {

vauth_daemon* g_daemon = nullptr;

extern "C" void on_signal(int) { vauth_daemon_stop(g_daemon); }

int report_failure(vauth_status s, const vauth_client* client = nullptr)
{
    std::cerr << "error: " << vauth_status_name(s) << ": " << vauth_last_error();
    if (client && vauth_client_last_ctap_status(client)) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "0x%02X", vauth_client_last_ctap_status(client));
        std::cerr << " [CTAP2 status " << buf << "]";
    }
    if (client && vauth_client_last_hid_error(client)) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "0x%02X", vauth_client_last_hid_error(client));
        std::cerr << " [CTAPHID error " << buf << "]";
    }
    std::cerr << "\n";
    return static_cast<int>(s);
}

std::string hex(const std::uint8_t* p, std::size_t n)
{
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(digits[p[i] >> 4]);
        out.push_back(digits[p[i] & 15]);
    }
    return out;
}

std::vector<std::uint8_t> unhex(const std::string& s)
{
    if (s.size() % 2)
        throw CLI::ValidationError("hex string has odd length");
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i < s.size(); i += 2)
        out.push_back(static_cast<std::uint8_t>(std::stoi(s.substr(i, 2), nullptr, 16)));
    return out;
}

struct DaemonArgs {
    std::string config;
    std::string transport;
    std::string socket;
    std::string policy;
    std::string log_dir;
    std::vector<std::string> settings;
};

int run_daemon(const DaemonArgs& a)
{
    vauth_config* cfg = vauth_config_new();
    auto set = [&](const char* k, const std::string& v) {
        return v.empty() ? VAUTH_OK : vauth_config_set(cfg, k, v.c_str());
    };
    vauth_status s = VAUTH_OK;
    if (!a.config.empty())
        s = vauth_config_load(cfg, a.config.c_str());
    if (s == VAUTH_OK)
        s = set("transport", a.transport);
    if (s == VAUTH_OK)
        s = set("socket_path", a.socket);
    if (s == VAUTH_OK)
        s = set("policy", a.policy);
    if (s == VAUTH_OK)
        s = set("log_dir", a.log_dir);
    for (const auto& kv : a.settings) {
        if (s != VAUTH_OK)
            break;
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
            vauth_config_free(cfg);
            return VAUTH_ERR_CONFIG;
        }
        s = vauth_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    }
    if (s == VAUTH_OK && vauth_config_set(cfg, "transport", "socket") != VAUTH_OK)
        s = VAUTH_ERR_CONFIG;
    if (s != VAUTH_OK) {
        vauth_config_free(cfg);
        return report_failure(s);
    }
    if (a.transport == "loopback") {
        vauth_config_free(cfg);
        std::cerr << "error: the loopback transport only exists inside one process; use the C API\n";
        return VAUTH_ERR_CONFIG;
    }

    s = vauth_daemon_create(cfg, &g_daemon);
    vauth_config_free(cfg);
    if (s != VAUTH_OK)
        return report_failure(s);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    s = vauth_daemon_run(g_daemon);
    vauth_daemon* d = g_daemon;
    g_daemon = nullptr;
    vauth_daemon_free(d);
    return s == VAUTH_OK ? 0 : report_failure(s);
}

void print_json(const char* text)
{
    std::cout << nlohmann::json::parse(text).dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Virtual FIDO2 authenticator"};
    app.require_subcommand(1);

    DaemonArgs da;
    auto* daemon = app.add_subcommand("daemon", "Serve the authenticator until interrupted");
    daemon->add_option("-c,--config", da.config, "key=value configuration file")->check(CLI::ExistingFile);
    daemon->add_option("--transport", da.transport, "Only socket is served from the command line");
    daemon->add_option("--socket", da.socket, "Unix socket path");
    daemon->add_option("--policy", da.policy, "auto-approve, auto-deny, scripted or interactive");
    daemon->add_option("--log-dir", da.log_dir, "Directory for log files");
    daemon->add_option("--set", da.settings, "Extra config setting key=value (repeatable)");

    std::string socket_path = "vauth.sock";
    std::string records = "vauth-client.json";
    auto* client = app.add_subcommand("client", "Conformance client");
    client->add_option("--socket", socket_path, "Daemon socket path")->capture_default_str();
    client->add_option("--records", records, "Client credential record file")->capture_default_str();
    client->require_subcommand(1);

    std::string rp, rp_name, user, user_id, pin, old_pin, new_pin, data;
    std::vector<std::string> credentials;
    std::optional<bool> resident;
    bool no_up = false;
    std::size_t ping_size = 0;

    auto* reg = client->add_subcommand("register", "makeCredential and verify the attestation");
    reg->add_option("--rp", rp, "Relying party id")->required();
    reg->add_option("--rp-name", rp_name);
    reg->add_option("--user", user, "User name")->required();
    reg->add_option("--user-id", user_id, "User handle as hex (default: hex of the user name)");
    reg->add_option("--pin", pin, "Obtain a PIN token and send pinAuth");
    reg->add_flag_function(
        "--resident,!--no-resident", [&](std::int64_t n) { resident = n > 0; }, "Request a resident key or not");

    auto* as = client->add_subcommand("assert", "getAssertion (+getNextAssertion) and verify");
    as->add_option("--rp", rp, "Relying party id")->required();
    as->add_option("--credential", credentials, "Allowed credential id as hex (repeatable)");
    as->add_option("--pin", pin);
    as->add_flag("--no-up", no_up, "Send up=false");

    auto* pinc = client->add_subcommand("pin", "Client PIN operations");
    pinc->require_subcommand(1);
    auto* pin_set = pinc->add_subcommand("set", "Set the first PIN");
    pin_set->add_option("--pin", pin)->required();
    auto* pin_change = pinc->add_subcommand("change", "Change the PIN");
    pin_change->add_option("--old", old_pin)->required();
    pin_change->add_option("--new", new_pin)->required();
    auto* pin_token = pinc->add_subcommand("token", "Obtain a PIN token");
    pin_token->add_option("--pin", pin)->required();
    auto* pin_retries = pinc->add_subcommand("retries", "Remaining PIN attempts");

    auto* reset = client->add_subcommand("reset", "authenticatorReset");
    auto* info = client->add_subcommand("info", "authenticatorGetInfo");
    auto* ping = client->add_subcommand("ping", "CTAPHID PING");
    ping->add_option("--data", data, "Payload as hex");
    ping->add_option("--size", ping_size, "Payload of this many bytes counting up from 0x00");

    CLI11_PARSE(app, argc, argv);

    if (daemon->parsed())
        return run_daemon(da);

    vauth_client* c = nullptr;
    vauth_status s = vauth_client_connect(socket_path.c_str(), records.c_str(), &c);
    if (s != VAUTH_OK)
        return report_failure(s);
    char* out = nullptr;

    if (reg->parsed()) {
        nlohmann::json o;
        o["rp_id"] = rp;
        if (!rp_name.empty())
            o["rp_name"] = rp_name;
        o["user_name"] = user;
        o["user_id"] = user_id.empty() ? hex(reinterpret_cast<const std::uint8_t*>(user.data()), user.size()) : user_id;
        if (!pin.empty())
            o["pin"] = pin;
        if (resident)
            o["resident"] = *resident;
        s = vauth_client_register(c, o.dump().c_str(), &out);
    } else if (as->parsed()) {
        nlohmann::json o;
        o["rp_id"] = rp;
        if (!credentials.empty())
            o["allow"] = credentials;
        if (!pin.empty())
            o["pin"] = pin;
        if (no_up)
            o["up"] = false;
        s = vauth_client_assert(c, o.dump().c_str(), &out);
    } else if (pin_set->parsed()) {
        s = vauth_client_pin_set(c, pin.c_str());
    } else if (pin_change->parsed()) {
        s = vauth_client_pin_change(c, old_pin.c_str(), new_pin.c_str());
    } else if (pin_token->parsed()) {
        s = vauth_client_pin_token(c, pin.c_str(), &out);
    } else if (pin_retries->parsed()) {
        int retries = 0;
        s = vauth_client_pin_retries(c, &retries);
        if (s == VAUTH_OK)
            std::cout << "{\n  \"retries\": " << retries << "\n}\n";
    } else if (reset->parsed()) {
        s = vauth_client_reset(c);
    } else if (info->parsed()) {
        s = vauth_client_get_info(c, &out);
    } else if (ping->parsed()) {
        std::vector<std::uint8_t> payload;
        try {
            payload = unhex(data);
        } catch (const std::exception& e) {
            std::cerr << "error: --data: " << e.what() << "\n";
            vauth_client_free(c);
            return VAUTH_ERR_ARGUMENT;
        }
        if (payload.empty())
            for (std::size_t i = 0; i < ping_size; ++i)
                payload.push_back(static_cast<std::uint8_t>(i));
        std::uint8_t* echo = nullptr;
        std::size_t echo_len = 0;
        s = vauth_client_ping(c, payload.data(), payload.size(), &echo, &echo_len);
        if (s == VAUTH_OK) {
            bool same = echo_len == payload.size() && std::equal(payload.begin(), payload.end(), echo);
            std::cout << "{\n  \"length\": " << echo_len << ",\n  \"echo_matches\": " << (same ? "true" : "false")
                      << "\n}\n";
            vauth_free_bytes(echo);
            if (!same)
                s = VAUTH_ERR_VERIFY;
        }
    }

    int rc = 0;
    if (s != VAUTH_OK) {
        rc = report_failure(s, c);
    } else if (out) {
        print_json(out);
    } else if (!pin_retries->parsed() && !ping->parsed()) {
        std::cout << "{\n  \"ok\": true\n}\n";
    }
    vauth_free_string(out);
    vauth_client_free(c);
    return rc;
}
