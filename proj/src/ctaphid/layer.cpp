#include "ctaphid/layer.hpp"

#include "common/timestamp.hpp"

namespace vauth::ctaphid {

using hid::AssembledMessage;
using hid::ChannelId;

class CtapHidLayer::Context : public authenticator::RequestContext {
public:
    Context(std::shared_ptr<std::atomic<bool>> cancelled, std::chrono::steady_clock::time_point deadline,
            KeepAliveTicker& ticker)
        : cancelled_(std::move(cancelled)), deadline_(deadline), ticker_(ticker)
    {
    }
    bool cancelled() const override
    {
        return cancelled_->load() || std::chrono::steady_clock::now() >= deadline_;
    }
    void set_status(authenticator::KeepAliveStatus s) override
    {
        ticker_.set_status(static_cast<std::uint8_t>(s));
    }

private:
    std::shared_ptr<std::atomic<bool>> cancelled_;
    std::chrono::steady_clock::time_point deadline_;
    KeepAliveTicker& ticker_;
};

CtapHidLayer::CtapHidLayer(CborHandler handler, ReportSink sink, LayerConfig config, Logger& logger)
    : handler_(std::move(handler)),
      sink_(std::move(sink)),
      config_(config),
      logger_(logger),
      allocator_(config.first_channel),
      ticker_([this](ChannelId cid, std::uint8_t status) { emit_keepalive(cid, status); })
{
    if (!config_.synchronous)
        worker_ = std::thread(&CtapHidLayer::worker_loop, this);
}

CtapHidLayer::~CtapHidLayer()
{
    {
        std::lock_guard lock(mu_);
        if (active_cancel_)
            active_cancel_->store(true);
    }
    {
        std::lock_guard lock(queue_mu_);
        stopping_ = true;
    }
    queue_cv_.notify_all();
    if (worker_.joinable())
        worker_.join();
    ticker_.stop();
}

void CtapHidLayer::set_audit_hook(AuditHook hook)
{
    std::lock_guard lock(audit_mu_);
    audit_hook_ = std::move(hook);
}

void CtapHidLayer::audit(const TransitionEvent& e)
{
    std::lock_guard lock(audit_mu_);
    if (!e.legal) {
        ++illegal_;
        log_ctap(std::string("illegal transition ") + state_name(e.from) + " -> " + state_name(e.to) + " on " +
                 hid::to_string(e.cid));
    }
    if (audit_hook_)
        audit_hook_(e);
}

Transaction& CtapHidLayer::transaction(ChannelId cid)
{
    auto& slot = transactions_[cid];
    if (!slot)
        slot = std::make_unique<Transaction>(cid, &active_, [this](const TransitionEvent& e) { audit(e); });
    return *slot;
}

bool CtapHidLayer::channel_allocated(ChannelId cid) const { return channels_.contains(cid); }

void CtapHidLayer::handle_report(ByteView raw)
{
    logger_.log(LogSink::usbhid, R"({"time":")" + iso_timestamp() + R"(","direction":"in","report":")" +
                                     to_hex(raw) + "\"}");
    hid::Packet pkt;
    try {
        pkt = hid::parse_packet(raw);
    } catch (const hid::FramingError& e) {
        log_ctap(std::string("dropped report: ") + e.what());
        return;
    }
    handle_packet(pkt);
}

void CtapHidLayer::handle_packet(const hid::Packet& pkt)
{
    std::optional<Job> job;
    {
        std::lock_guard lock(mu_);
        ChannelId cid = hid::channel_of(pkt);
        auto res = reassembler_.push(pkt);
        if (res.error) {
            switch (res.error->kind()) {
            case hid::FramingErrorKind::unexpected_continuation:
                log_ctap("ignored continuation without open message on " + hid::to_string(cid));
                break;
            case hid::FramingErrorKind::invalid_sequence:
                log_ctap("invalid sequence on " + hid::to_string(cid));
                send_wrapped(TxState::error, cid, cmd::error, Bytes{err::invalid_seq});
                break;
            case hid::FramingErrorKind::payload_too_large:
                send_wrapped(TxState::error, cid, cmd::error, Bytes{err::invalid_len});
                break;
            case hid::FramingErrorKind::spurious_init: {
                auto* init = std::get_if<hid::InitializationPacket>(&pkt);
                bool restart_cmd = init && (init->cmd == cmd::init || init->cmd == cmd::cancel);
                log_ctap("initialization packet interrupted open message on " + hid::to_string(cid));
                if (!restart_cmd)
                    send_wrapped(TxState::error, cid, cmd::error, Bytes{err::channel_busy});
                break;
            }
            case hid::FramingErrorKind::bad_length:
                break;
            }
        }
        if (res.message)
            dispatch(*res.message, job);
    }
    idle_cv_.notify_all();
    if (!job)
        return;
    if (config_.synchronous) {
        run_job(std::move(*job));
    } else {
        {
            std::lock_guard lock(queue_mu_);
            queue_.push_back(std::move(*job));
        }
        queue_cv_.notify_one();
    }
}

void CtapHidLayer::dispatch(const AssembledMessage& msg, std::optional<Job>& job)
{
    ChannelId cid = msg.cid;
    log_ctap(std::string(command_name(msg.cmd)) + " request on " + hid::to_string(cid) + ", " +
             std::to_string(msg.payload.size()) + " bytes");

    if (msg.cmd == cmd::init) {
        process_init(msg);
        return;
    }
    if (msg.cmd == cmd::cancel) {
        if (!channel_allocated(cid))
            return;
        Transaction tx(cid, nullptr, [this](const TransitionEvent& e) { audit(e); });
        tx.wrap(TxState::cancel, msg);
        if (active_cid_ == cid && active_cancel_ && job_running_) {
            active_cancel_->store(true);
            log_ctap("cancel requested for active request on " + hid::to_string(cid));
        }
        tx.reset();
        return;
    }
    if (!channel_allocated(cid)) {
        send_wrapped(TxState::error, cid, cmd::error, Bytes{err::invalid_channel});
        return;
    }
    if (active_cid_) {
        send_wrapped(TxState::error, cid, cmd::error, Bytes{err::channel_busy});
        return;
    }

    Transaction& tx = transaction(cid);
    tx.request_received(msg);
    active_cid_ = cid;

    switch (msg.cmd) {
    case cmd::ping:
        complete(cid, cmd::ping, msg.payload);
        break;
    case cmd::wink:
        complete(cid, cmd::wink, {});
        break;
    case cmd::msg:
        complete(cid, cmd::error, Bytes{err::invalid_cmd});
        break;
    case cmd::cbor: {
        if (msg.payload.empty()) {
            complete(cid, cmd::error, Bytes{err::invalid_len});
            break;
        }
        ++generation_;
        active_cancel_ = std::make_shared<std::atomic<bool>>(false);
        job_running_ = true;
        job = Job{cid, generation_, msg.payload, active_cancel_,
                  std::chrono::steady_clock::now() + config_.request_timeout};
        ticker_.start(cid, static_cast<std::uint8_t>(authenticator::KeepAliveStatus::processing),
                      config_.keepalive_interval, config_.request_timeout);
        break;
    }
    default:
        complete(cid, cmd::error, Bytes{err::invalid_cmd});
        break;
    }
}

void CtapHidLayer::process_init(const AssembledMessage& msg)
{
    ChannelId cid = msg.cid;
    bool known = cid.is_broadcast() || channel_allocated(cid);
    if (!known) {
        send_wrapped(TxState::error, cid, cmd::error, Bytes{err::invalid_channel});
        return;
    }
    if (msg.payload.size() != 8) {
        send_wrapped(TxState::error, cid, cmd::error, Bytes{err::invalid_len});
        return;
    }
    if (active_cid_ && *active_cid_ == cid && !cid.is_broadcast())
        abort_active("re-INIT");
    if (active_cid_) {
        send_wrapped(TxState::error, cid, cmd::error, Bytes{err::channel_busy});
        return;
    }

    Transaction& tx = transaction(cid);
    tx.request_received(msg);
    active_cid_ = cid;

    ChannelId assigned = cid;
    if (cid.is_broadcast()) {
        try {
            assigned = allocator_.allocate();
        } catch (const hid::ChannelAllocationError& e) {
            log_ctap(e.what());
            complete(cid, cmd::error, Bytes{err::other});
            return;
        }
        channels_.insert(assigned);
    }
    Bytes resp = msg.payload;
    put_u32_be(resp, assigned.value);
    resp.push_back(kProtocolVersion);
    resp.push_back(config_.device_major);
    resp.push_back(config_.device_minor);
    resp.push_back(config_.device_build);
    resp.push_back(config_.capabilities);
    log_ctap("INIT assigned " + hid::to_string(assigned));
    complete(cid, cmd::init, std::move(resp));
}

void CtapHidLayer::abort_active(const char* why)
{
    if (!active_cid_)
        return;
    log_ctap(std::string("aborting active transaction on ") + hid::to_string(*active_cid_) + ": " + why);
    ticker_.stop();
    if (active_cancel_)
        active_cancel_->store(true);
    ++generation_;
    transaction(*active_cid_).reset();
    active_cid_.reset();
}

void CtapHidLayer::complete(ChannelId cid, std::uint8_t command, Bytes payload)
{
    ticker_.stop();
    Transaction& tx = transaction(cid);
    AssembledMessage resp{cid, command, std::move(payload)};
    if (resp.payload.size() > hid::kMaxPayload) {
        log_ctap("response of " + std::to_string(resp.payload.size()) + " bytes exceeds the HID limit");
        resp = AssembledMessage{cid, cmd::error, Bytes{err::other}};
    }
    tx.response_set(resp);
    write_message(cid, resp.cmd, resp.payload);
    tx.reset();
    if (active_cid_ == cid)
        active_cid_.reset();
    log_ctap(std::string(command_name(resp.cmd)) + " response on " + hid::to_string(cid) + ", " +
             std::to_string(resp.payload.size()) + " bytes");
}

void CtapHidLayer::send_wrapped(TxState kind, ChannelId cid, std::uint8_t command, ByteView payload)
{
    Transaction tx(cid, nullptr, [this](const TransitionEvent& e) { audit(e); });
    tx.wrap(kind, AssembledMessage{cid, command, Bytes(payload.begin(), payload.end())});
    write_message(cid, command, payload);
    tx.reset();
    if (command == cmd::error)
        log_ctap("ERROR 0x" + to_hex(payload) + " on " + hid::to_string(cid));
}

void CtapHidLayer::send_error(ChannelId cid, std::uint8_t code)
{
    send_wrapped(TxState::error, cid, cmd::error, Bytes{code});
}

void CtapHidLayer::emit_keepalive(ChannelId cid, std::uint8_t status)
{
    ++keepalives_;
    send_wrapped(TxState::keep_alive, cid, cmd::keepalive, Bytes{status});
}

void CtapHidLayer::write_message(ChannelId cid, std::uint8_t command, ByteView payload)
{
    auto packets = hid::fragment(cid, command, payload);
    std::lock_guard lock(write_mu_);
    for (const auto& p : packets)
        write_report(hid::serialize(p));
}

void CtapHidLayer::write_report(const hid::Report& r)
{
    logger_.log(LogSink::usbhid, R"({"time":")" + iso_timestamp() + R"(","direction":"out","report":")" +
                                     to_hex(r) + "\"}");
    try {
        sink_(r);
    } catch (const std::exception& e) {
        logger_.log(LogSink::debug, std::string("report write failed: ") + e.what());
    }
}

void CtapHidLayer::run_job(Job job)
{
    Context ctx(job.cancelled, job.deadline, ticker_);
    Bytes resp;
    try {
        resp = handler_(job.payload, ctx);
    } catch (const std::exception& e) {
        logger_.log(LogSink::debug, std::string("CBOR handler threw: ") + e.what());
        resp = Bytes{err::other};
    }
    {
        std::lock_guard lock(mu_);
        job_running_ = false;
        if (job.generation != generation_ || active_cid_ != job.cid) {
            log_ctap("discarded result of aborted request on " + hid::to_string(job.cid));
        } else if (job.cancelled->load()) {
            complete(job.cid, cmd::cbor, Bytes{kCtap2KeepaliveCancel});
        } else if (std::chrono::steady_clock::now() >= job.deadline) {
            complete(job.cid, cmd::error, Bytes{err::msg_timeout});
        } else {
            complete(job.cid, cmd::cbor, std::move(resp));
        }
    }
    idle_cv_.notify_all();
}

void CtapHidLayer::worker_loop()
{
    for (;;) {
        Job job;
        {
            std::unique_lock lock(queue_mu_);
            queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (stopping_)
                return;
            job = std::move(queue_.front());
            queue_.pop_front();
        }
        run_job(std::move(job));
    }
}

bool CtapHidLayer::wait_idle(std::chrono::milliseconds timeout)
{
    std::unique_lock lock(mu_);
    return idle_cv_.wait_for(lock, timeout, [&] { return !active_cid_ && !job_running_; });
}

} // namespace vauth::ctaphid
