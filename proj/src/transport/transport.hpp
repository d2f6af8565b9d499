#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hid/packet.hpp"

namespace vauth::transport {

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by read() once the transport is closed and drained, and by write() after close().
class TransportClosed : public TransportError {
public:
    TransportClosed() : TransportError("transport closed") {}
};

/// Carries whole 64-byte reports. Reports are never split or coalesced and
/// arrive in write order.
class Transport {
public:
    virtual ~Transport() = default;
    /// Next report, or nullopt once `timeout` passes without one.
    virtual std::optional<hid::Report> read(std::chrono::milliseconds timeout) = 0;
    /// Atomic with respect to other writers.
    virtual void write(const hid::Report& report) = 0;
    virtual void close() = 0;
};

/// In-process report queue; one direction of a loopback pair.
class ReportQueue {
public:
    void push(const hid::Report& r);
    std::optional<hid::Report> pop(std::chrono::milliseconds timeout);
    void close();
    bool closed() const;

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<hid::Report> items_;
    bool closed_ = false;
};

class LoopbackTransport : public Transport {
public:
    LoopbackTransport(std::shared_ptr<ReportQueue> in, std::shared_ptr<ReportQueue> out)
        : in_(std::move(in)), out_(std::move(out))
    {
    }
    ~LoopbackTransport() override { close(); }

    std::optional<hid::Report> read(std::chrono::milliseconds timeout) override { return in_->pop(timeout); }
    void write(const hid::Report& report) override;
    /// Closes both directions; the peer drains what was already written.
    void close() override;

private:
    std::shared_ptr<ReportQueue> in_;
    std::shared_ptr<ReportQueue> out_;
};

/// Two connected ends: (device end, host end).
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_loopback_pair();

enum class TraceDirection { host_to_device, device_to_host };

struct TraceEntry {
    TraceDirection direction;
    hid::Report report;
    bool operator==(const TraceEntry&) const = default;
};

class TraceRecorder {
public:
    void record(TraceDirection d, const hid::Report& r);
    std::vector<TraceEntry> entries() const;
    void clear();

private:
    mutable std::mutex mu_;
    std::vector<TraceEntry> entries_;
};

/// Host-side wrapper that records every report crossing it.
class TracingTransport : public Transport {
public:
    TracingTransport(Transport& inner, TraceRecorder& recorder) : inner_(inner), recorder_(recorder) {}

    std::optional<hid::Report> read(std::chrono::milliseconds timeout) override;
    void write(const hid::Report& report) override;
    void close() override { inner_.close(); }

private:
    Transport& inner_;
    TraceRecorder& recorder_;
};

} // namespace vauth::transport
