// Exercises libvauth through its C header only.
#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>
#include <unistd.h>

#include "vauth/vauth.h"

using nlohmann::json;

namespace {

class Dir {
public:
    Dir()
    {
        static std::atomic<int> n{0};
        path_ = std::filesystem::temp_directory_path() /
                ("vauth-capi-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~Dir() { std::filesystem::remove_all(path_); }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

struct Config {
    vauth_config* c = vauth_config_new();
    ~Config() { vauth_config_free(c); }
    void set(const char* k, const std::string& v) { ASSERT_EQ(vauth_config_set(c, k, v.c_str()), VAUTH_OK) << k; }
};

void base_config(Config& cfg, const Dir& dir)
{
    cfg.set("storage_path", dir / "store.json");
    cfg.set("log_dir", dir / "logs");
    cfg.set("log_stdout", "false");
    cfg.set("keepalive_interval_ms", "50");
}

json take_json(char* s)
{
    json j = json::parse(s);
    vauth_free_string(s);
    return j;
}

std::string register_json(const std::string& rp, const std::string& user_hex, const char* extra = "")
{
    return R"({"rp_id":")" + rp + R"(","user_id":")" + user_hex + R"(","user_name":"u)" + user_hex + "\"" + extra +
           "}";
}

struct LoopbackSession {
    Dir dir;
    Config cfg;
    vauth_daemon* daemon = nullptr;
    vauth_client* client = nullptr;

    explicit LoopbackSession(const char* records = nullptr)
    {
        base_config(cfg, dir);
        cfg.set("transport", "loopback");
        EXPECT_EQ(vauth_daemon_create(cfg.c, &daemon), VAUTH_OK) << vauth_last_error();
        EXPECT_EQ(vauth_daemon_start(daemon), VAUTH_OK);
        std::string rp = records ? dir / records : "";
        EXPECT_EQ(vauth_client_connect_loopback(daemon, records ? rp.c_str() : nullptr, &client), VAUTH_OK)
            << vauth_last_error();
    }
    ~LoopbackSession()
    {
        vauth_client_free(client);
        vauth_daemon_free(daemon);
    }
};

} // namespace

TEST(CApi, StatusNamesAndErrors)
{
    EXPECT_STREQ(vauth_status_name(VAUTH_OK), "ok");
    EXPECT_STREQ(vauth_status_name(VAUTH_ERR_STORAGE_AUTH), "storage authentication failed");
    Config cfg;
    EXPECT_EQ(vauth_config_set(cfg.c, "no_such_key", "1"), VAUTH_ERR_CONFIG);
    EXPECT_NE(std::string(vauth_last_error()).find("no_such_key"), std::string::npos);
    std::thread([] { EXPECT_STREQ(vauth_last_error(), ""); }).join();
    EXPECT_EQ(vauth_config_set(nullptr, "a", "b"), VAUTH_ERR_ARGUMENT);
    EXPECT_EQ(vauth_config_parse(cfg.c, "transport = loopback\npolicy = nope\n"), VAUTH_ERR_CONFIG);
    EXPECT_EQ(vauth_config_load(cfg.c, "/nonexistent/vauth.conf"), VAUTH_ERR_CONFIG);
    EXPECT_EQ(vauth_client_register(nullptr, "{}", nullptr), VAUTH_ERR_ARGUMENT);
}

TEST(CApi, DeviceAnswersReports)
{
    Dir dir;
    Config cfg;
    base_config(cfg, dir);
    struct Sink {
        std::mutex mu;
        std::vector<std::vector<uint8_t>> reports;
    } sink;
    auto cb = [](void* user, const uint8_t* r, size_t n) {
        auto* s = static_cast<Sink*>(user);
        std::lock_guard lock(s->mu);
        s->reports.emplace_back(r, r + n);
    };
    vauth_device* dev = nullptr;
    ASSERT_EQ(vauth_device_create(cfg.c, cb, &sink, &dev), VAUTH_OK) << vauth_last_error();

    uint8_t init[64] = {0xFF, 0xFF, 0xFF, 0xFF, 0x86, 0x00, 0x08, 1, 2, 3, 4, 5, 6, 7, 8};
    ASSERT_EQ(vauth_device_handle_report(dev, init, 64), VAUTH_OK);
    ASSERT_EQ(vauth_device_wait_idle(dev, 2000), 1);
    uint8_t cid[4];
    {
        std::lock_guard lock(sink.mu);
        ASSERT_EQ(sink.reports.size(), 1u);
        const auto& r = sink.reports[0];
        ASSERT_EQ(r.size(), 64u);
        EXPECT_EQ(r[4], 0x86);
        EXPECT_EQ(r[6], 17);
        EXPECT_EQ(std::vector<uint8_t>(r.begin() + 7, r.begin() + 15), std::vector<uint8_t>({1, 2, 3, 4, 5, 6, 7, 8}));
        std::copy(r.begin() + 15, r.begin() + 19, cid);
        sink.reports.clear();
    }

    uint8_t get_info[64] = {cid[0], cid[1], cid[2], cid[3], 0x90, 0x00, 0x01, 0x04};
    ASSERT_EQ(vauth_device_handle_report(dev, get_info, 64), VAUTH_OK);
    ASSERT_EQ(vauth_device_wait_idle(dev, 2000), 1);
    {
        std::lock_guard lock(sink.mu);
        ASSERT_FALSE(sink.reports.empty());
        const auto& r = sink.reports[0];
        EXPECT_EQ(r[4], 0x90);
        EXPECT_EQ(r[7], 0x00);
        sink.reports.clear();
    }
    ASSERT_EQ(vauth_device_handle_report(dev, get_info, 63), VAUTH_OK);
    vauth_device_wait_idle(dev, 200);
    {
        std::lock_guard lock(sink.mu);
        EXPECT_TRUE(sink.reports.empty());
    }
    vauth_device_free(dev);
}

TEST(CApi, LoopbackRegisterAssertPinReset)
{
    LoopbackSession s("records.json");
    ASSERT_TRUE(s.client);

    char* out = nullptr;
    ASSERT_EQ(vauth_client_get_info(s.client, &out), VAUTH_OK);
    json info = take_json(out);
    EXPECT_EQ(info["versions"][0], "FIDO_2_0");
    EXPECT_EQ(info["max_msg_size"], 7609);

    ASSERT_EQ(vauth_client_register(s.client, register_json("example.com", "01").c_str(), &out), VAUTH_OK)
        << vauth_last_error();
    json reg = take_json(out);
    EXPECT_TRUE(reg["attestation_verified"].get<bool>());
    std::string cred = reg["credential_id"];

    std::string assert_opts = R"({"rp_id":"example.com","allow":[")" + cred + "\"]}";
    ASSERT_EQ(vauth_client_assert(s.client, assert_opts.c_str(), &out), VAUTH_OK) << vauth_last_error();
    json as = take_json(out);
    ASSERT_EQ(as["assertions"].size(), 1u);
    EXPECT_EQ(as["assertions"][0]["credential_id"], cred);
    EXPECT_GT(as["assertions"][0]["sign_count"].get<unsigned>(), reg["sign_count"].get<unsigned>());

    int retries = 0;
    ASSERT_EQ(vauth_client_pin_retries(s.client, &retries), VAUTH_OK);
    EXPECT_EQ(retries, 8);
    ASSERT_EQ(vauth_client_pin_set(s.client, "2468"), VAUTH_OK) << vauth_last_error();
    EXPECT_EQ(vauth_client_register(s.client, register_json("example.com", "02").c_str(), &out), VAUTH_ERR_CTAP);
    EXPECT_EQ(vauth_client_last_ctap_status(s.client), 0x36);
    ASSERT_EQ(vauth_client_register(s.client, register_json("example.com", "02", R"(,"pin":"2468")").c_str(), &out),
              VAUTH_OK)
        << vauth_last_error();
    EXPECT_EQ(take_json(out)["flags"].get<int>() & 0x04, 0x04);
    EXPECT_EQ(vauth_client_pin_token(s.client, "0000", &out), VAUTH_ERR_CTAP);
    EXPECT_EQ(vauth_client_last_ctap_status(s.client), 0x31);
    ASSERT_EQ(vauth_client_pin_change(s.client, "2468", "13579"), VAUTH_OK) << vauth_last_error();
    ASSERT_EQ(vauth_client_pin_token(s.client, "13579", &out), VAUTH_OK);
    EXPECT_EQ(take_json(out)["pin_token"].get<std::string>().size(), 32u);

    EXPECT_TRUE(std::filesystem::exists(s.dir / "records.json"));

    ASSERT_EQ(vauth_client_reset(s.client), VAUTH_OK);
    EXPECT_EQ(vauth_client_assert(s.client, R"({"rp_id":"example.com"})", &out), VAUTH_ERR_CTAP);
    EXPECT_EQ(vauth_client_last_ctap_status(s.client), 0x2E);
}

TEST(CApi, PingLimits)
{
    LoopbackSession s;
    std::vector<uint8_t> data(7609);
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = static_cast<uint8_t>(i * 7);
    uint8_t* echo = nullptr;
    size_t n = 0;
    ASSERT_EQ(vauth_client_ping(s.client, data.data(), data.size(), &echo, &n), VAUTH_OK);
    ASSERT_EQ(n, data.size());
    EXPECT_EQ(std::vector<uint8_t>(echo, echo + n), data);
    vauth_free_bytes(echo);
    data.push_back(0);
    EXPECT_NE(vauth_client_ping(s.client, data.data(), data.size(), &echo, &n), VAUTH_OK);
}

TEST(CApi, SocketDaemon)
{
    Dir dir;
    Config cfg;
    base_config(cfg, dir);
    cfg.set("socket_path", dir / "d.sock");
    vauth_daemon* d = nullptr;
    ASSERT_EQ(vauth_daemon_create(cfg.c, &d), VAUTH_OK) << vauth_last_error();
    ASSERT_EQ(vauth_daemon_start(d), VAUTH_OK);
    EXPECT_EQ(vauth_daemon_start(d), VAUTH_ERR_ARGUMENT);
    vauth_client* c = nullptr;
    ASSERT_EQ(vauth_client_connect((dir / "d.sock").c_str(), nullptr, &c), VAUTH_OK) << vauth_last_error();
    char* out = nullptr;
    ASSERT_EQ(vauth_client_register(c, register_json("sock.example", "0a").c_str(), &out), VAUTH_OK);
    vauth_free_string(out);
    vauth_client_free(c);
    vauth_daemon_free(d);

    EXPECT_EQ(vauth_client_connect((dir / "d.sock").c_str(), nullptr, &c), VAUTH_ERR_TRANSPORT);
    EXPECT_TRUE(std::filesystem::exists(dir / "logs/usbhid.log"));
}

TEST(CApi, EncryptedStoreWrongPassword)
{
    Dir dir;
    {
        Config cfg;
        base_config(cfg, dir);
        cfg.set("transport", "loopback");
        cfg.set("storage_backend", "encrypted");
        cfg.set("storage_password", "right");
        cfg.set("kdf_iterations", "1000");
        vauth_daemon* d = nullptr;
        ASSERT_EQ(vauth_daemon_create(cfg.c, &d), VAUTH_OK) << vauth_last_error();
        vauth_daemon_free(d);
        cfg.set("storage_password", "wrong");
        EXPECT_EQ(vauth_daemon_create(cfg.c, &d), VAUTH_ERR_STORAGE_AUTH);
        cfg.set("storage_backend", "plaintext");
        EXPECT_EQ(vauth_daemon_create(cfg.c, &d), VAUTH_ERR_STORAGE);
    }
}
