#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>

#include "hid/packet.hpp"

namespace vauth::ctaphid {

namespace cmd {
constexpr std::uint8_t ping = 0x01;
constexpr std::uint8_t msg = 0x03;
constexpr std::uint8_t init = 0x06;
constexpr std::uint8_t wink = 0x08;
constexpr std::uint8_t cbor = 0x10;
constexpr std::uint8_t cancel = 0x11;
constexpr std::uint8_t keepalive = 0x3B;
constexpr std::uint8_t error = 0x3F;
} // namespace cmd

namespace err {
constexpr std::uint8_t invalid_cmd = 0x01;
constexpr std::uint8_t invalid_par = 0x02;
constexpr std::uint8_t invalid_len = 0x03;
constexpr std::uint8_t invalid_seq = 0x04;
constexpr std::uint8_t msg_timeout = 0x05;
constexpr std::uint8_t channel_busy = 0x06;
constexpr std::uint8_t invalid_channel = 0x0B;
constexpr std::uint8_t other = 0x7F;
} // namespace err

const char* command_name(std::uint8_t command);

enum class TxState { empty, request_recv, response_set, keep_alive, cancel, error };

const char* state_name(TxState s);

/// EMPTY -> REQUEST_RECV -> RESPONSE_SET -> EMPTY, EMPTY -> {ERROR,
/// CANCEL, KEEP_ALIVE}, and any state -> EMPTY.
bool legal_transition(TxState from, TxState to);

struct TransitionEvent {
    hid::ChannelId cid;
    TxState from;
    TxState to;
    bool legal;
};

using AuditHook = std::function<void(const TransitionEvent&)>;

/// Counts transactions in REQUEST_RECV or RESPONSE_SET.
class ActiveCounter {
public:
    void enter() { peak_update(++n_); }
    void leave() { --n_; }
    int current() const { return n_.load(); }
    int peak() const { return peak_.load(); }

private:
    void peak_update(int v)
    {
        int p = peak_.load();
        while (v > p && !peak_.compare_exchange_weak(p, v)) {
        }
    }
    std::atomic<int> n_{0};
    std::atomic<int> peak_{0};
};

/// One channel's request/response pair and its FSM state. Every
/// transition, legal or not, is reported to the audit hook; illegal ones
/// are still refused.
class Transaction {
public:
    Transaction(hid::ChannelId cid, ActiveCounter* counter = nullptr, AuditHook hook = {})
        : cid_(cid), counter_(counter), hook_(std::move(hook))
    {
    }
    ~Transaction();
    Transaction(const Transaction&) = delete;
    Transaction& operator=(const Transaction&) = delete;
    Transaction(Transaction&&) = delete;

    hid::ChannelId cid() const { return cid_; }
    TxState state() const { return state_; }
    const std::optional<hid::AssembledMessage>& request() const { return request_; }
    const std::optional<hid::AssembledMessage>& response() const { return response_; }

    /// Returns false (and audits) when the transition is illegal.
    bool request_received(hid::AssembledMessage request);
    bool response_set(hid::AssembledMessage response);
    /// Out-of-band wrappers: response-only transactions.
    bool wrap(TxState kind, hid::AssembledMessage response);
    void reset();

private:
    bool move(TxState to);

    hid::ChannelId cid_;
    ActiveCounter* counter_;
    AuditHook hook_;
    TxState state_ = TxState::empty;
    std::optional<hid::AssembledMessage> request_;
    std::optional<hid::AssembledMessage> response_;
};

} // namespace vauth::ctaphid
