#include "ctaphid/transaction.hpp"

namespace vauth::ctaphid {

const char* command_name(std::uint8_t command)
{
    switch (command) {
    case cmd::ping: return "PING";
    case cmd::msg: return "MSG";
    case cmd::init: return "INIT";
    case cmd::wink: return "WINK";
    case cmd::cbor: return "CBOR";
    case cmd::cancel: return "CANCEL";
    case cmd::keepalive: return "KEEPALIVE";
    case cmd::error: return "ERROR";
    default: return "UNKNOWN";
    }
}

const char* state_name(TxState s)
{
    switch (s) {
    case TxState::empty: return "EMPTY";
    case TxState::request_recv: return "REQUEST_RECV";
    case TxState::response_set: return "RESPONSE_SET";
    case TxState::keep_alive: return "KEEP_ALIVE";
    case TxState::cancel: return "CANCEL";
    case TxState::error: return "ERROR";
    }
    return "?";
}

bool legal_transition(TxState from, TxState to)
{
    if (to == TxState::empty)
        return true;
    switch (from) {
    case TxState::empty:
        return to == TxState::request_recv || to == TxState::error || to == TxState::cancel ||
               to == TxState::keep_alive;
    case TxState::request_recv:
        return to == TxState::response_set;
    default:
        return false;
    }
}

namespace {
bool is_active(TxState s) { return s == TxState::request_recv || s == TxState::response_set; }
} // namespace

Transaction::~Transaction()
{
    if (counter_ && is_active(state_))
        counter_->leave();
}

bool Transaction::move(TxState to)
{
    bool legal = legal_transition(state_, to);
    if (hook_)
        hook_(TransitionEvent{cid_, state_, to, legal});
    if (!legal)
        return false;
    if (counter_) {
        if (!is_active(state_) && is_active(to))
            counter_->enter();
        else if (is_active(state_) && !is_active(to))
            counter_->leave();
    }
    state_ = to;
    return true;
}

bool Transaction::request_received(hid::AssembledMessage request)
{
    if (!move(TxState::request_recv))
        return false;
    request_ = std::move(request);
    response_.reset();
    return true;
}

bool Transaction::response_set(hid::AssembledMessage response)
{
    if (!move(TxState::response_set))
        return false;
    response_ = std::move(response);
    return true;
}

bool Transaction::wrap(TxState kind, hid::AssembledMessage response)
{
    if (kind != TxState::error && kind != TxState::keep_alive && kind != TxState::cancel)
        return false;
    if (!move(kind))
        return false;
    response_ = std::move(response);
    return true;
}

void Transaction::reset()
{
    move(TxState::empty);
    request_.reset();
    response_.reset();
}

} // namespace vauth::ctaphid
