#include "vauth/vauth.h"

#include <cstdlib>
#include <cstring>
#include <thread>

#include <json.hpp>

#include "ctap2/status.hpp"
#include "ctaphid/transaction.hpp"
#include "storage/envelope.hpp"
#include "transport/client.hpp"
#include "transport/daemon.hpp"
#include "transport/file_logger.hpp"
#include "transport/socket_transport.hpp"

using namespace vauth;
using nlohmann::json;

struct vauth_config {
    transport::CliConfig value;
};

struct vauth_device {
    std::unique_ptr<authenticator::PresencePolicy> policy;
    std::unique_ptr<transport::VirtualDevice> device;
};

struct vauth_daemon {
    std::unique_ptr<transport::FileLogger> logger;
    std::unique_ptr<authenticator::PresencePolicy> policy;
    std::unique_ptr<transport::Daemon> daemon;
    std::thread thread;
};

struct vauth_client {
    std::unique_ptr<transport::Transport> transport;
    transport::RecordBook records;
    std::string records_path;
    std::unique_ptr<transport::ConformanceClient> client;
    int last_ctap = 0;
    int last_hid = 0;
};

namespace {

thread_local std::string last_error;

vauth_status fail(vauth_status s, const std::string& msg)
{
    last_error = msg;
    return s;
}

template <class F>
vauth_status guarded(F&& f)
{
    last_error.clear();
    try {
        f();
        return VAUTH_OK;
    } catch (const transport::ConfigError& e) {
        return fail(VAUTH_ERR_CONFIG, e.what());
    } catch (const storage::StorageError& e) {
        if (e.kind() == storage::StorageErrorKind::authentication)
            return fail(VAUTH_ERR_STORAGE_AUTH, e.what());
        return fail(VAUTH_ERR_STORAGE, e.what());
    } catch (const transport::TransportError& e) {
        return fail(VAUTH_ERR_TRANSPORT, e.what());
    } catch (const transport::CtapStatusError& e) {
        return fail(VAUTH_ERR_CTAP, e.what());
    } catch (const transport::HidError& e) {
        return fail(VAUTH_ERR_CTAPHID, e.what());
    } catch (const transport::VerificationError& e) {
        return fail(VAUTH_ERR_VERIFY, e.what());
    } catch (const hid::FramingError& e) {
        return fail(VAUTH_ERR_ARGUMENT, e.what());
    } catch (const ctap2::CtapError& e) {
        return fail(VAUTH_ERR_CTAP, e.what());
    } catch (const crypto::CryptoError& e) {
        return fail(VAUTH_ERR_CRYPTO, e.what());
    } catch (const json::exception& e) {
        return fail(VAUTH_ERR_ARGUMENT, std::string("bad options: ") + e.what());
    } catch (const std::invalid_argument& e) {
        return fail(VAUTH_ERR_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(VAUTH_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(VAUTH_ERR_INTERNAL, "unknown failure");
    }
}

char* dup_string(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

/// Client calls record the CTAP2 status and CTAPHID error of their outcome.
template <class F>
vauth_status client_call(vauth_client* c, F&& f)
{
    if (!c)
        return fail(VAUTH_ERR_ARGUMENT, "null client");
    c->last_ctap = 0;
    c->last_hid = 0;
    vauth_status s = guarded([&] {
        try {
            f();
        } catch (const transport::CtapStatusError& e) {
            c->last_ctap = e.status();
            throw;
        } catch (const transport::HidError& e) {
            c->last_hid = e.code();
            throw;
        }
    });
    if (!c->records_path.empty()) {
        try {
            c->records.save(c->records_path);
        } catch (const std::exception& e) {
            if (s == VAUTH_OK)
                return fail(VAUTH_ERR_INTERNAL, e.what());
        }
    }
    return s;
}

std::vector<Bytes> hex_list(const json& j, const char* key)
{
    std::vector<Bytes> out;
    if (j.contains(key))
        for (const auto& v : j.at(key))
            out.push_back(from_hex(v.get<std::string>()));
    return out;
}

std::optional<std::string> opt_string(const json& j, const char* key)
{
    if (j.contains(key) && !j.at(key).is_null())
        return j.at(key).get<std::string>();
    return std::nullopt;
}

std::optional<bool> opt_bool(const json& j, const char* key)
{
    if (j.contains(key) && !j.at(key).is_null())
        return j.at(key).get<bool>();
    return std::nullopt;
}

void open_client(vauth_client* c, const char* records_path)
{
    if (records_path && *records_path) {
        c->records_path = records_path;
        c->records = transport::RecordBook::load(records_path);
    }
    c->client = std::make_unique<transport::ConformanceClient>(*c->transport, c->records);
    c->client->connect();
}

} // namespace

extern "C" {

const char* vauth_status_name(vauth_status status)
{
    switch (status) {
    case VAUTH_OK: return "ok";
    case VAUTH_ERR_ARGUMENT: return "invalid argument";
    case VAUTH_ERR_CONFIG: return "configuration error";
    case VAUTH_ERR_STORAGE: return "storage error";
    case VAUTH_ERR_STORAGE_AUTH: return "storage authentication failed";
    case VAUTH_ERR_TRANSPORT: return "transport error";
    case VAUTH_ERR_CTAP: return "CTAP2 error";
    case VAUTH_ERR_CTAPHID: return "CTAPHID error";
    case VAUTH_ERR_VERIFY: return "verification failed";
    case VAUTH_ERR_CRYPTO: return "crypto error";
    case VAUTH_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* vauth_last_error(void) { return last_error.c_str(); }
void vauth_free_string(char* s) { std::free(s); }
void vauth_free_bytes(uint8_t* b) { std::free(b); }

vauth_config* vauth_config_new(void)
{
    try {
        return new vauth_config{};
    } catch (...) {
        return nullptr;
    }
}

vauth_status vauth_config_load(vauth_config* config, const char* path)
{
    if (!config || !path)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return guarded([&] { config->value = transport::load_config(path, config->value); });
}

vauth_status vauth_config_parse(vauth_config* config, const char* text)
{
    if (!config || !text)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return guarded([&] { config->value = transport::parse_config(text, config->value); });
}

vauth_status vauth_config_set(vauth_config* config, const char* key, const char* value)
{
    if (!config || !key || !value)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return guarded([&] { transport::apply_setting(config->value, key, value); });
}

void vauth_config_free(vauth_config* config) { delete config; }

vauth_status vauth_device_create(const vauth_config* config, vauth_report_fn on_report, void* user,
                                 vauth_device** out)
{
    if (!config || !on_report || !out)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        auto d = std::make_unique<vauth_device>();
        d->policy = transport::make_policy(config->value);
        auto password = transport::resolve_storage_password(config->value, *d->policy);
        d->device = std::make_unique<transport::VirtualDevice>(
            config->value, *d->policy, null_logger(),
            [on_report, user](const hid::Report& r) { on_report(user, r.data(), r.size()); }, password);
        *out = d.release();
    });
}

vauth_status vauth_device_handle_report(vauth_device* device, const uint8_t* report, size_t len)
{
    if (!device || (!report && len))
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return guarded([&] { device->device->handle_report(ByteView(report, len)); });
}

int vauth_device_wait_idle(vauth_device* device, unsigned timeout_ms)
{
    if (!device)
        return 0;
    return device->device->layer().wait_idle(std::chrono::milliseconds(timeout_ms)) ? 1 : 0;
}

void vauth_device_free(vauth_device* device) { delete device; }

vauth_status vauth_daemon_create(const vauth_config* config, vauth_daemon** out)
{
    if (!config || !out)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        auto d = std::make_unique<vauth_daemon>();
        d->logger = std::make_unique<transport::FileLogger>(
            transport::FileLoggerOptions{config->value.log_dir, config->value.log_stdout});
        d->policy = transport::make_policy(config->value);
        try {
            d->daemon = std::make_unique<transport::Daemon>(config->value, *d->policy, *d->logger);
        } catch (const std::exception& e) {
            d->logger->log(LogSink::debug, std::string("startup failed: ") + e.what());
            throw;
        }
        *out = d.release();
    });
}

vauth_status vauth_daemon_run(vauth_daemon* daemon)
{
    if (!daemon)
        return fail(VAUTH_ERR_ARGUMENT, "null daemon");
    return guarded([&] { daemon->daemon->run(); });
}

vauth_status vauth_daemon_start(vauth_daemon* daemon)
{
    if (!daemon)
        return fail(VAUTH_ERR_ARGUMENT, "null daemon");
    if (daemon->thread.joinable())
        return fail(VAUTH_ERR_ARGUMENT, "daemon already started");
    return guarded([&] {
        daemon->thread = std::thread([daemon] {
            try {
                daemon->daemon->run();
            } catch (const std::exception& e) {
                daemon->logger->log(LogSink::debug, std::string("daemon stopped: ") + e.what());
            }
        });
    });
}

void vauth_daemon_stop(vauth_daemon* daemon)
{
    if (daemon && daemon->daemon)
        daemon->daemon->stop();
}

void vauth_daemon_free(vauth_daemon* daemon)
{
    if (!daemon)
        return;
    daemon->daemon->stop();
    if (daemon->thread.joinable())
        daemon->thread.join();
    delete daemon;
}

vauth_status vauth_client_connect(const char* socket_path, const char* records_path, vauth_client** out)
{
    if (!socket_path || !out)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        auto c = std::make_unique<vauth_client>();
        c->transport = std::make_unique<transport::SocketClientTransport>(socket_path);
        open_client(c.get(), records_path);
        *out = c.release();
    });
}

vauth_status vauth_client_connect_loopback(vauth_daemon* daemon, const char* records_path, vauth_client** out)
{
    if (!daemon || !out)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        auto c = std::make_unique<vauth_client>();
        c->transport = daemon->daemon->take_loopback_client();
        if (!c->transport)
            throw transport::TransportError("daemon has no free loopback end");
        open_client(c.get(), records_path);
        *out = c.release();
    });
}

vauth_status vauth_client_register(vauth_client* client, const char* options_json, char** result_json)
{
    if (!options_json || !result_json)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return client_call(client, [&] {
        json o = json::parse(options_json);
        transport::RegisterOptions opt;
        opt.rp_id = o.at("rp_id").get<std::string>();
        opt.rp_name = opt_string(o, "rp_name");
        opt.user_id = from_hex(o.at("user_id").get<std::string>());
        opt.user_name = o.at("user_name").get<std::string>();
        opt.display_name = opt_string(o, "display_name");
        opt.resident = opt_bool(o, "resident");
        opt.pin = opt_string(o, "pin");
        opt.exclude = hex_list(o, "exclude");
        auto r = client->client->register_credential(opt);
        json res;
        res["rp_id"] = r.record.rp_id;
        res["credential_id"] = to_hex(r.record.credential_id);
        res["public_key"] = to_hex(r.record.public_key);
        res["sign_count"] = r.record.sign_count;
        res["flags"] = r.flags;
        res["auth_data"] = to_hex(r.auth_data);
        res["signature"] = to_hex(r.signature);
        res["client_data_hash"] = to_hex(r.client_data_hash);
        res["attestation_verified"] = true;
        *result_json = dup_string(res.dump());
    });
}

vauth_status vauth_client_assert(vauth_client* client, const char* options_json, char** result_json)
{
    if (!options_json || !result_json)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return client_call(client, [&] {
        json o = json::parse(options_json);
        transport::AssertOptions opt;
        opt.rp_id = o.at("rp_id").get<std::string>();
        opt.allow = hex_list(o, "allow");
        opt.pin = opt_string(o, "pin");
        opt.up = opt_bool(o, "up");
        auto r = client->client->assert_credential(opt);
        json res;
        res["rp_id"] = opt.rp_id;
        res["number_of_credentials"] = r.number_of_credentials;
        res["client_data_hash"] = to_hex(r.client_data_hash);
        res["assertions"] = json::array();
        for (const auto& a : r.assertions) {
            json j;
            j["credential_id"] = to_hex(a.credential_id);
            j["sign_count"] = a.sign_count;
            j["flags"] = a.flags;
            j["auth_data"] = to_hex(a.auth_data);
            j["signature"] = to_hex(a.signature);
            if (a.user) {
                j["user_id"] = to_hex(a.user->id);
                if (a.user->name)
                    j["user_name"] = *a.user->name;
            }
            j["verified"] = true;
            res["assertions"].push_back(std::move(j));
        }
        *result_json = dup_string(res.dump());
    });
}

vauth_status vauth_client_get_info(vauth_client* client, char** result_json)
{
    if (!result_json)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return client_call(client, [&] {
        auto info = client->client->get_info();
        json res;
        res["versions"] = info.versions;
        res["aaguid"] = to_hex(info.aaguid);
        res["options"] = info.options;
        if (info.max_msg_size)
            res["max_msg_size"] = *info.max_msg_size;
        if (info.pin_protocols)
            res["pin_protocols"] = *info.pin_protocols;
        if (info.algorithms)
            res["algorithms"] = *info.algorithms;
        *result_json = dup_string(res.dump());
    });
}

vauth_status vauth_client_pin_set(vauth_client* client, const char* pin)
{
    if (!pin)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return client_call(client, [&] { client->client->set_pin(pin); });
}

vauth_status vauth_client_pin_change(vauth_client* client, const char* old_pin, const char* new_pin)
{
    if (!old_pin || !new_pin)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return client_call(client, [&] { client->client->change_pin(old_pin, new_pin); });
}

vauth_status vauth_client_pin_token(vauth_client* client, const char* pin, char** result_json)
{
    if (!pin || !result_json)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return client_call(client, [&] {
        Bytes token = client->client->pin_token(pin);
        *result_json = dup_string(json{{"pin_token", to_hex(token)}}.dump());
    });
}

vauth_status vauth_client_pin_retries(vauth_client* client, int* retries)
{
    if (!retries)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return client_call(client, [&] { *retries = static_cast<int>(client->client->pin_retries()); });
}

vauth_status vauth_client_reset(vauth_client* client)
{
    return client_call(client, [&] { client->client->reset(); });
}

vauth_status vauth_client_ping(vauth_client* client, const uint8_t* data, size_t len, uint8_t** echo,
                               size_t* echo_len)
{
    if ((!data && len) || !echo || !echo_len)
        return fail(VAUTH_ERR_ARGUMENT, "null argument");
    return client_call(client, [&] {
        Bytes r = client->client->ping(ByteView(data, len));
        auto* buf = static_cast<uint8_t*>(std::malloc(r.empty() ? 1 : r.size()));
        if (!buf)
            throw std::bad_alloc();
        std::copy(r.begin(), r.end(), buf);
        *echo = buf;
        *echo_len = r.size();
    });
}

int vauth_client_last_ctap_status(const vauth_client* client) { return client ? client->last_ctap : 0; }
int vauth_client_last_hid_error(const vauth_client* client) { return client ? client->last_hid : 0; }

void vauth_client_free(vauth_client* client)
{
    if (!client)
        return;
    if (client->transport)
        client->transport->close();
    delete client;
}

} // extern "C"
