#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "authenticator/presence.hpp"
#include "common/log.hpp"
#include "ctaphid/keepalive.hpp"
#include "ctaphid/transaction.hpp"
#include "hid/packet.hpp"

namespace vauth::ctaphid {

constexpr std::uint8_t kProtocolVersion = 2;
constexpr std::uint8_t kCapWink = 0x01;
constexpr std::uint8_t kCapCbor = 0x04;
constexpr std::uint8_t kCapNmsg = 0x08;
constexpr std::uint8_t kCtap2KeepaliveCancel = 0x2D;

struct LayerConfig {
    std::uint8_t device_major = 1;
    std::uint8_t device_minor = 0;
    std::uint8_t device_build = 0;
    std::uint8_t capabilities = kCapWink | kCapCbor | kCapNmsg;
    std::chrono::milliseconds keepalive_interval{100};
    std::chrono::milliseconds request_timeout{30000};
    /// Run CBOR requests on the thread that delivered the last packet
    /// instead of the worker. CANCEL cannot interrupt such requests.
    bool synchronous = false;
    std::uint32_t first_channel = 1;
};

using CborHandler = std::function<Bytes(ByteView request, authenticator::RequestContext& ctx)>;
using ReportSink = std::function<void(const hid::Report&)>;

/// CTAPHID command processing and the single-transaction rule. Packets
/// arrive from one reader context; CBOR requests run on a worker so that
/// CANCEL and busy replies keep flowing; every outbound report goes
/// through one writer lock.
class CtapHidLayer {
public:
    CtapHidLayer(CborHandler handler, ReportSink sink, LayerConfig config = {}, Logger& logger = null_logger());
    ~CtapHidLayer();
    CtapHidLayer(const CtapHidLayer&) = delete;
    CtapHidLayer& operator=(const CtapHidLayer&) = delete;

    /// Install before the first packet.
    void set_audit_hook(AuditHook hook);

    void handle_report(ByteView raw);
    void handle_packet(const hid::Packet& pkt);

    /// Response-only ERROR message; allowed regardless of other channels.
    void send_error(hid::ChannelId cid, std::uint8_t code);

    /// Blocks until no transaction is active and no job is queued.
    bool wait_idle(std::chrono::milliseconds timeout = std::chrono::seconds(60));

    int active_transactions() const { return active_.current(); }
    int peak_active_transactions() const { return active_.peak(); }
    std::uint64_t illegal_transitions() const { return illegal_.load(); }
    std::uint64_t keepalives_sent() const { return keepalives_.load(); }

private:
    struct Job {
        hid::ChannelId cid;
        std::uint64_t generation = 0;
        Bytes payload;
        std::shared_ptr<std::atomic<bool>> cancelled;
        std::chrono::steady_clock::time_point deadline;
    };
    class Context;

    Transaction& transaction(hid::ChannelId cid);
    void audit(const TransitionEvent& e);
    void dispatch(const hid::AssembledMessage& msg, std::optional<Job>& job);
    void process_init(const hid::AssembledMessage& msg);
    void abort_active(const char* why);
    void complete(hid::ChannelId cid, std::uint8_t command, Bytes payload);
    void send_wrapped(TxState kind, hid::ChannelId cid, std::uint8_t command, ByteView payload);
    void write_message(hid::ChannelId cid, std::uint8_t command, ByteView payload);
    void write_report(const hid::Report& r);
    void emit_keepalive(hid::ChannelId cid, std::uint8_t status);
    void run_job(Job job);
    void worker_loop();
    bool channel_allocated(hid::ChannelId cid) const;
    void log_ctap(const std::string& record) { logger_.log(LogSink::ctap, record); }

    CborHandler handler_;
    ReportSink sink_;
    LayerConfig config_;
    Logger& logger_;

    mutable std::mutex mu_;
    std::condition_variable idle_cv_;
    hid::Reassembler reassembler_;
    hid::ChannelAllocator allocator_;
    std::set<hid::ChannelId> channels_;
    std::map<hid::ChannelId, std::unique_ptr<Transaction>> transactions_;
    std::optional<hid::ChannelId> active_cid_;
    std::uint64_t generation_ = 0;
    std::shared_ptr<std::atomic<bool>> active_cancel_;
    bool job_running_ = false;

    std::mutex write_mu_;
    std::mutex audit_mu_;
    AuditHook audit_hook_;
    ActiveCounter active_;
    std::atomic<std::uint64_t> illegal_{0};
    std::atomic<std::uint64_t> keepalives_{0};

    KeepAliveTicker ticker_;

    std::mutex queue_mu_;
    std::condition_variable queue_cv_;
    std::deque<Job> queue_;
    bool stopping_ = false;
    std::thread worker_;
};

} // namespace vauth::ctaphid
