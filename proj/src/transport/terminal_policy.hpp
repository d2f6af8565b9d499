#pragma once

#include <atomic>
#include <cstdio>
#include <mutex>
#include <optional>
#include <string>

#include "authenticator/presence.hpp"

namespace vauth::transport {

/// Presence, verification and password prompts on a terminal. Typing
/// "quit" at any prompt, or while idle, requests shutdown.
class TerminalPolicy : public authenticator::PresencePolicy {
public:
    explicit TerminalPolicy(int in_fd = 0, std::FILE* out = stderr) : in_fd_(in_fd), out_(out) {}

    bool confirm_presence(const authenticator::PresencePrompt& prompt,
                          const authenticator::RequestContext& ctx) override;
    std::optional<std::string> request_password(const authenticator::PresencePrompt& prompt,
                                                 const authenticator::RequestContext& ctx) override;
    bool shutdown_requested() const override;

    void request_shutdown() { shutdown_ = true; }

private:
    /// nullopt on cancel, EOF or shutdown.
    std::optional<std::string> read_line(const authenticator::RequestContext& ctx, bool echo);
    bool is_quit(const std::string& line);

    int in_fd_;
    std::FILE* out_;
    mutable std::mutex io_mu_;
    mutable std::atomic<bool> shutdown_{false};
    mutable std::string idle_buffer_;
};

} // namespace vauth::transport
