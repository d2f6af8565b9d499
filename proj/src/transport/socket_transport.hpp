#pragma once

#include <atomic>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <thread>

#include "transport/transport.hpp"

namespace vauth::transport {

/// Device end of a Unix stream socket. Each connected client sends exact
/// 64-byte records; every written report goes to all connected clients,
/// which filter by channel id as HID hosts do.
class SocketServerTransport : public Transport {
public:
    /// Binds and listens. A stale socket file at `path` is replaced; any
    /// other existing file is an error.
    explicit SocketServerTransport(std::filesystem::path path);
    ~SocketServerTransport() override;

    std::optional<hid::Report> read(std::chrono::milliseconds timeout) override { return inbound_.pop(timeout); }
    void write(const hid::Report& report) override;
    void close() override;

    std::size_t client_count() const;
    const std::filesystem::path& path() const { return path_; }

private:
    struct Client {
        int fd = -1;
        std::thread reader;
        std::atomic<bool> done{false};
    };

    void accept_loop();
    void read_loop(Client* client);
    void reap_finished();

    std::filesystem::path path_;
    int listen_fd_ = -1;
    std::atomic<bool> closing_{false};
    ReportQueue inbound_;
    std::thread acceptor_;
    mutable std::mutex clients_mu_;
    std::list<std::unique_ptr<Client>> clients_;
    std::mutex write_mu_;
};

/// Host end of the socket transport.
class SocketClientTransport : public Transport {
public:
    explicit SocketClientTransport(const std::filesystem::path& path);
    ~SocketClientTransport() override;

    std::optional<hid::Report> read(std::chrono::milliseconds timeout) override;
    void write(const hid::Report& report) override;
    void close() override;

private:
    int fd_ = -1;
    Bytes pending_;
    std::mutex read_mu_;
    std::mutex write_mu_;
};

} // namespace vauth::transport
