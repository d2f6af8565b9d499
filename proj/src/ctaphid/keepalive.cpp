#include "ctaphid/keepalive.hpp"

namespace vauth::ctaphid {

KeepAliveTicker::~KeepAliveTicker() { stop(); }

void KeepAliveTicker::start(hid::ChannelId cid, std::uint8_t status, std::chrono::milliseconds interval,
                            std::chrono::milliseconds budget)
{
    stop();
    std::lock_guard lock(mu_);
    active_ = true;
    ++generation_;
    cid_ = cid;
    status_ = status;
    interval_ = interval;
    deadline_ = std::chrono::steady_clock::now() + budget;
    thread_ = std::thread(&KeepAliveTicker::run, this, generation_);
}

void KeepAliveTicker::set_status(std::uint8_t status)
{
    std::lock_guard lock(mu_);
    status_ = status;
}

void KeepAliveTicker::stop()
{
    std::thread t;
    {
        std::lock_guard lock(mu_);
        active_ = false;
        ++generation_;
        cv_.notify_all();
        t = std::move(thread_);
    }
    if (t.joinable() && t.get_id() != std::this_thread::get_id())
        t.join();
    else if (t.joinable())
        t.detach();
}

bool KeepAliveTicker::active() const
{
    std::lock_guard lock(mu_);
    return active_;
}

std::uint64_t KeepAliveTicker::ticks() const
{
    std::lock_guard lock(mu_);
    return ticks_;
}

void KeepAliveTicker::run(std::uint64_t generation)
{
    std::unique_lock lock(mu_);
    auto next = std::chrono::steady_clock::now() + interval_;
    for (;;) {
        cv_.wait_until(lock, next, [&] { return generation_ != generation; });
        if (generation_ != generation || !active_)
            return;
        if (std::chrono::steady_clock::now() >= deadline_) {
            active_ = false;
            return;
        }
        // Emitting under the lock is what makes stop() a hard barrier.
        ++ticks_;
        emit_(cid_, status_);
        next += interval_;
    }
}

} // namespace vauth::ctaphid
