#include "transport/socket_transport.hpp"

#include <cerrno>
#include <cstring>

#include <poll.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <sys/un.h>
#include <unistd.h>

namespace vauth::transport {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

sockaddr_un make_address(const std::filesystem::path& path)
{
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    std::string s = path.string();
    if (s.empty() || s.size() >= sizeof(addr.sun_path))
        throw TransportError("socket path too long or empty: " + s);
    std::memcpy(addr.sun_path, s.c_str(), s.size() + 1);
    return addr;
}

bool write_all(int fd, const std::uint8_t* data, std::size_t n)
{
    while (n > 0) {
        ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EINTR)
                continue;
            return false;
        }
        data += w;
        n -= static_cast<std::size_t>(w);
    }
    return true;
}

} // namespace

SocketServerTransport::SocketServerTransport(std::filesystem::path path) : path_(std::move(path))
{
    sockaddr_un addr = make_address(path_);
    struct stat st{};
    if (::lstat(path_.c_str(), &st) == 0) {
        if (!S_ISSOCK(st.st_mode))
            throw TransportError("refusing to replace non-socket file " + path_.string());
        ::unlink(path_.c_str());
    }
    listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (listen_fd_ < 0)
        throw TransportError(errno_text("socket"));
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(listen_fd_, 8) != 0) {
        std::string msg = errno_text(("bind " + path_.string()).c_str());
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw TransportError(msg);
    }
    acceptor_ = std::thread(&SocketServerTransport::accept_loop, this);
}

SocketServerTransport::~SocketServerTransport() { close(); }

void SocketServerTransport::accept_loop()
{
    while (!closing_) {
        pollfd p{listen_fd_, POLLIN, 0};
        int rc = ::poll(&p, 1, 50);
        if (rc <= 0)
            continue;
        int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0)
            continue;
        std::lock_guard lock(clients_mu_);
        reap_finished();
        auto client = std::make_unique<Client>();
        client->fd = fd;
        Client* raw = client.get();
        clients_.push_back(std::move(client));
        raw->reader = std::thread(&SocketServerTransport::read_loop, this, raw);
    }
}

void SocketServerTransport::read_loop(Client* client)
{
    hid::Report buf{};
    std::size_t have = 0;
    for (;;) {
        ssize_t n = ::recv(client->fd, buf.data() + have, buf.size() - have, 0);
        if (n < 0 && errno == EINTR)
            continue;
        if (n <= 0)
            break;
        have += static_cast<std::size_t>(n);
        if (have == buf.size()) {
            try {
                inbound_.push(buf);
            } catch (const TransportClosed&) {
                break;
            }
            have = 0;
        }
    }
    client->done = true;
}

void SocketServerTransport::reap_finished()
{
    for (auto it = clients_.begin(); it != clients_.end();) {
        if ((*it)->done) {
            if ((*it)->reader.joinable())
                (*it)->reader.join();
            ::close((*it)->fd);
            it = clients_.erase(it);
        } else {
            ++it;
        }
    }
}

void SocketServerTransport::write(const hid::Report& report)
{
    if (closing_)
        throw TransportClosed();
    std::lock_guard wlock(write_mu_);
    std::lock_guard lock(clients_mu_);
    for (auto& c : clients_) {
        if (c->done)
            continue;
        if (!write_all(c->fd, report.data(), report.size()))
            ::shutdown(c->fd, SHUT_RDWR);
    }
}

void SocketServerTransport::close()
{
    if (closing_.exchange(true))
        return;
    if (acceptor_.joinable())
        acceptor_.join();
    {
        std::lock_guard lock(clients_mu_);
        for (auto& c : clients_)
            ::shutdown(c->fd, SHUT_RDWR);
        for (auto& c : clients_) {
            if (c->reader.joinable())
                c->reader.join();
            ::close(c->fd);
        }
        clients_.clear();
    }
    inbound_.close();
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        ::unlink(path_.c_str());
    }
}

std::size_t SocketServerTransport::client_count() const
{
    std::lock_guard lock(clients_mu_);
    std::size_t n = 0;
    for (const auto& c : clients_)
        n += c->done ? 0 : 1;
    return n;
}

SocketClientTransport::SocketClientTransport(const std::filesystem::path& path)
{
    sockaddr_un addr = make_address(path);
    fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd_ < 0)
        throw TransportError(errno_text("socket"));
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        std::string msg = errno_text(("connect " + path.string()).c_str());
        ::close(fd_);
        fd_ = -1;
        throw TransportError(msg);
    }
}

SocketClientTransport::~SocketClientTransport()
{
    close();
    if (fd_ >= 0)
        ::close(fd_);
}

std::optional<hid::Report> SocketClientTransport::read(std::chrono::milliseconds timeout)
{
    std::lock_guard lock(read_mu_);
    auto deadline = std::chrono::steady_clock::now() + timeout;
    while (pending_.size() < hid::kReportSize) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() < 0)
            return std::nullopt;
        pollfd p{fd_, POLLIN, 0};
        int rc = ::poll(&p, 1, static_cast<int>(left.count()));
        if (rc < 0 && errno == EINTR)
            continue;
        if (rc < 0)
            throw TransportError(errno_text("poll"));
        if (rc == 0)
            return std::nullopt;
        std::uint8_t buf[512];
        ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
        if (n < 0 && errno == EINTR)
            continue;
        if (n <= 0)
            throw TransportClosed();
        pending_.insert(pending_.end(), buf, buf + n);
    }
    hid::Report r{};
    std::copy_n(pending_.begin(), r.size(), r.begin());
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(r.size()));
    return r;
}

void SocketClientTransport::write(const hid::Report& report)
{
    std::lock_guard lock(write_mu_);
    if (!write_all(fd_, report.data(), report.size()))
        throw TransportClosed();
}

void SocketClientTransport::close()
{
    if (fd_ >= 0)
        ::shutdown(fd_, SHUT_RDWR);
}

} // namespace vauth::transport
