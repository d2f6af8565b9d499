#include "transport/terminal_policy.hpp"

#include <poll.h>
#include <termios.h>
#include <unistd.h>

namespace vauth::transport {

using authenticator::PresencePrompt;
using authenticator::RequestContext;

namespace {

class EchoGuard {
public:
    EchoGuard(int fd, bool echo) : fd_(fd)
    {
        if (echo || !::isatty(fd) || ::tcgetattr(fd, &saved_) != 0)
            return;
        termios t = saved_;
        t.c_lflag &= ~static_cast<tcflag_t>(ECHO);
        active_ = ::tcsetattr(fd, TCSANOW, &t) == 0;
    }
    ~EchoGuard()
    {
        if (active_)
            ::tcsetattr(fd_, TCSANOW, &saved_);
    }

private:
    int fd_;
    termios saved_{};
    bool active_ = false;
};

} // namespace

bool TerminalPolicy::is_quit(const std::string& line)
{
    if (line == "quit" || line == "shutdown") {
        shutdown_ = true;
        return true;
    }
    return false;
}

std::optional<std::string> TerminalPolicy::read_line(const RequestContext& ctx, bool echo)
{
    EchoGuard guard(in_fd_, echo);
    std::string line = std::move(idle_buffer_);
    idle_buffer_.clear();
    for (;;) {
        if (ctx.cancelled() || shutdown_)
            return std::nullopt;
        pollfd p{in_fd_, POLLIN, 0};
        int rc = ::poll(&p, 1, 50);
        if (rc <= 0)
            continue;
        char c = 0;
        ssize_t n = ::read(in_fd_, &c, 1);
        if (n <= 0) {
            shutdown_ = true;
            return std::nullopt;
        }
        if (c == '\n') {
            if (!echo)
                std::fputc('\n', out_);
            return line;
        }
        line.push_back(c);
    }
}

bool TerminalPolicy::confirm_presence(const PresencePrompt& prompt, const RequestContext& ctx)
{
    std::lock_guard lock(io_mu_);
    std::fprintf(out_, "\n[vauth] %s\n[vauth] approve? [y/N] ", describe(prompt).c_str());
    std::fflush(out_);
    auto line = read_line(ctx, true);
    if (!line) {
        std::fprintf(out_, "\n[vauth] request %s\n", shutdown_ ? "abandoned" : "cancelled");
        return false;
    }
    if (is_quit(*line))
        return false;
    return *line == "y" || *line == "Y" || *line == "yes";
}

std::optional<std::string> TerminalPolicy::request_password(const PresencePrompt& prompt, const RequestContext& ctx)
{
    std::lock_guard lock(io_mu_);
    std::fprintf(out_, "\n[vauth] %s\n[vauth] password: ", describe(prompt).c_str());
    std::fflush(out_);
    auto line = read_line(ctx, false);
    if (!line || line->empty())
        return std::nullopt;
    return line;
}

bool TerminalPolicy::shutdown_requested() const
{
    if (shutdown_)
        return true;
    std::unique_lock lock(io_mu_, std::try_to_lock);
    if (!lock.owns_lock())
        return false;
    for (;;) {
        pollfd p{in_fd_, POLLIN, 0};
        if (::poll(&p, 1, 0) <= 0)
            return false;
        char c = 0;
        ssize_t n = ::read(in_fd_, &c, 1);
        if (n <= 0) {
            shutdown_ = true;
            return true;
        }
        if (c != '\n') {
            idle_buffer_.push_back(c);
            continue;
        }
        std::string line = std::move(idle_buffer_);
        idle_buffer_.clear();
        if (line == "quit" || line == "shutdown") {
            shutdown_ = true;
            return true;
        }
    }
}

} // namespace vauth::transport
