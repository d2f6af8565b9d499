#include "authenticator/presence.hpp"

#include <thread>

namespace vauth::authenticator {

namespace {
constexpr auto kPoll = std::chrono::milliseconds(5);
} // namespace

RequestContext& null_context()
{
    static RequestContext ctx;
    return ctx;
}

std::string describe(const PresencePrompt& p)
{
    std::string s = p.operation;
    if (!p.rp_id.empty())
        s += " for " + p.rp_id;
    if (!p.user_name.empty())
        s += " (user " + p.user_name + ")";
    return s;
}

bool cancellable_sleep(std::chrono::milliseconds d, const RequestContext& ctx)
{
    auto until = std::chrono::steady_clock::now() + d;
    while (std::chrono::steady_clock::now() < until) {
        if (ctx.cancelled())
            return false;
        std::this_thread::sleep_for(std::min<std::chrono::nanoseconds>(kPoll, until - std::chrono::steady_clock::now()));
    }
    return !ctx.cancelled();
}

ScriptedPolicy::ScriptedPolicy(std::vector<bool> decisions, std::chrono::milliseconds delay)
    : decisions_(decisions.begin(), decisions.end()), delay_(delay)
{
}

bool ScriptedPolicy::confirm_presence(const PresencePrompt& prompt, const RequestContext& ctx)
{
    bool decision;
    {
        std::lock_guard lock(mu_);
        prompts_.push_back(prompt);
        if (decisions_.empty())
            throw PresenceScriptExhausted();
        decision = decisions_.front();
        decisions_.pop_front();
    }
    if (delay_.count() > 0 && !cancellable_sleep(delay_, ctx))
        return false;
    return decision;
}

std::size_t ScriptedPolicy::remaining() const
{
    std::lock_guard lock(mu_);
    return decisions_.size();
}

std::vector<PresencePrompt> ScriptedPolicy::prompts() const
{
    std::lock_guard lock(mu_);
    return prompts_;
}

bool ManualPolicy::confirm_presence(const PresencePrompt&, const RequestContext& ctx)
{
    std::unique_lock lock(mu_);
    waiting_ = true;
    decision_.reset();
    cv_.notify_all();
    while (!decision_) {
        if (ctx.cancelled()) {
            waiting_ = false;
            return false;
        }
        cv_.wait_for(lock, kPoll);
    }
    waiting_ = false;
    bool d = *decision_;
    decision_.reset();
    return d;
}

void ManualPolicy::decide(bool d)
{
    std::lock_guard lock(mu_);
    decision_ = d;
    cv_.notify_all();
}

bool ManualPolicy::wait_for_prompt(std::chrono::milliseconds timeout)
{
    std::unique_lock lock(mu_);
    return cv_.wait_for(lock, timeout, [&] { return waiting_; });
}

} // namespace vauth::authenticator
