#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>

#include "hid/packet.hpp"

namespace vauth::ctaphid {

/// Emits keep-alive status bytes for one channel at a fixed interval from
/// its own thread. After stop() returns no further emission happens.
class KeepAliveTicker {
public:
    using Emit = std::function<void(hid::ChannelId, std::uint8_t status)>;

    explicit KeepAliveTicker(Emit emit) : emit_(std::move(emit)) {}
    ~KeepAliveTicker();
    KeepAliveTicker(const KeepAliveTicker&) = delete;
    KeepAliveTicker& operator=(const KeepAliveTicker&) = delete;

    /// Restarts the ticker for `cid`. Ticks stop on their own once `budget` elapses.
    void start(hid::ChannelId cid, std::uint8_t status, std::chrono::milliseconds interval,
               std::chrono::milliseconds budget = std::chrono::seconds(30));
    void set_status(std::uint8_t status);
    void stop();

    bool active() const;
    std::uint64_t ticks() const;

private:
    void run(std::uint64_t generation);

    Emit emit_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::thread thread_;
    bool active_ = false;
    std::uint64_t generation_ = 0;
    hid::ChannelId cid_;
    std::uint8_t status_ = 1;
    std::chrono::milliseconds interval_{100};
    std::chrono::steady_clock::time_point deadline_;
    std::uint64_t ticks_ = 0;
};

} // namespace vauth::ctaphid
