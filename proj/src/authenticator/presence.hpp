#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vauth::authenticator {

enum class KeepAliveStatus : std::uint8_t { processing = 1, up_needed = 2 };

/// Per-request hooks supplied by the transport layer.
class RequestContext {
public:
    virtual ~RequestContext() = default;
    virtual bool cancelled() const { return false; }
    virtual void set_status(KeepAliveStatus) {}
};

/// Context for direct calls with no transport behind them.
RequestContext& null_context();

struct PresencePrompt {
    std::string operation; // "makeCredential", "getAssertion", "reset", ...
    std::string rp_id;
    std::string user_name;
};

std::string describe(const PresencePrompt& p);

class PresenceScriptExhausted : public std::runtime_error {
public:
    PresenceScriptExhausted() : std::runtime_error("scripted presence policy has no decisions left") {}
};

/// User presence and verification gate. Implementations may block, but
/// must return promptly once ctx.cancelled() becomes true.
class PresencePolicy {
public:
    virtual ~PresencePolicy() = default;
    virtual bool confirm_presence(const PresencePrompt& prompt, const RequestContext& ctx) = 0;
    /// Password for user verification; nullopt when the user declines.
    virtual std::optional<std::string> request_password(const PresencePrompt& prompt, const RequestContext& ctx)
    {
        (void)prompt;
        (void)ctx;
        return std::nullopt;
    }
    virtual bool shutdown_requested() const { return false; }
};

class AutoApprovePolicy : public PresencePolicy {
public:
    explicit AutoApprovePolicy(std::optional<std::string> password = std::nullopt) : password_(std::move(password)) {}
    bool confirm_presence(const PresencePrompt&, const RequestContext&) override { return true; }
    std::optional<std::string> request_password(const PresencePrompt&, const RequestContext&) override
    {
        return password_;
    }

private:
    std::optional<std::string> password_;
};

class AutoDenyPolicy : public PresencePolicy {
public:
    bool confirm_presence(const PresencePrompt&, const RequestContext&) override { return false; }
};

/// Consumes decisions in order; throws PresenceScriptExhausted once empty.
/// Each decision is delivered after `delay`, or early as a denial on cancel.
class ScriptedPolicy : public PresencePolicy {
public:
    explicit ScriptedPolicy(std::vector<bool> decisions, std::chrono::milliseconds delay = {});
    bool confirm_presence(const PresencePrompt& prompt, const RequestContext& ctx) override;
    std::size_t remaining() const;
    std::vector<PresencePrompt> prompts() const;

private:
    mutable std::mutex mu_;
    std::deque<bool> decisions_;
    std::chrono::milliseconds delay_;
    std::vector<PresencePrompt> prompts_;
};

/// Blocks until another thread calls approve() or deny(), or the request
/// is cancelled. Used to hold a request open in tests.
class ManualPolicy : public PresencePolicy {
public:
    bool confirm_presence(const PresencePrompt& prompt, const RequestContext& ctx) override;
    void approve() { decide(true); }
    void deny() { decide(false); }
    /// Waits until a prompt is pending; false on timeout.
    bool wait_for_prompt(std::chrono::milliseconds timeout);

private:
    void decide(bool d);

    std::mutex mu_;
    std::condition_variable cv_;
    bool waiting_ = false;
    std::optional<bool> decision_;
};

/// Sleeps up to `d`, polling for cancellation. Returns false if cancelled.
bool cancellable_sleep(std::chrono::milliseconds d, const RequestContext& ctx);

} // namespace vauth::authenticator
