#include "transport/transport.hpp"

namespace vauth::transport {

void ReportQueue::push(const hid::Report& r)
{
    {
        std::lock_guard lock(mu_);
        if (closed_)
            throw TransportClosed();
        items_.push_back(r);
    }
    cv_.notify_one();
}

std::optional<hid::Report> ReportQueue::pop(std::chrono::milliseconds timeout)
{
    std::unique_lock lock(mu_);
    if (!cv_.wait_for(lock, timeout, [&] { return !items_.empty() || closed_; }))
        return std::nullopt;
    if (items_.empty())
        throw TransportClosed();
    hid::Report r = items_.front();
    items_.pop_front();
    return r;
}

void ReportQueue::close()
{
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool ReportQueue::closed() const
{
    std::lock_guard lock(mu_);
    return closed_;
}

void LoopbackTransport::write(const hid::Report& report) { out_->push(report); }

void LoopbackTransport::close()
{
    in_->close();
    out_->close();
}

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_loopback_pair()
{
    auto to_device = std::make_shared<ReportQueue>();
    auto to_host = std::make_shared<ReportQueue>();
    return {std::make_unique<LoopbackTransport>(to_device, to_host),
            std::make_unique<LoopbackTransport>(to_host, to_device)};
}

void TraceRecorder::record(TraceDirection d, const hid::Report& r)
{
    std::lock_guard lock(mu_);
    entries_.push_back(TraceEntry{d, r});
}

std::vector<TraceEntry> TraceRecorder::entries() const
{
    std::lock_guard lock(mu_);
    return entries_;
}

void TraceRecorder::clear()
{
    std::lock_guard lock(mu_);
    entries_.clear();
}

std::optional<hid::Report> TracingTransport::read(std::chrono::milliseconds timeout)
{
    auto r = inner_.read(timeout);
    if (r)
        recorder_.record(TraceDirection::device_to_host, *r);
    return r;
}

void TracingTransport::write(const hid::Report& report)
{
    recorder_.record(TraceDirection::host_to_device, report);
    inner_.write(report);
}

} // namespace vauth::transport
