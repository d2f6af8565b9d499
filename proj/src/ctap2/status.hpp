#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vauth::ctap2 {

enum class Status : std::uint8_t {
    ok = 0x00,
    invalid_command = 0x01,
    invalid_parameter = 0x02,
    invalid_length = 0x03,
    invalid_seq = 0x04,
    timeout = 0x05,
    channel_busy = 0x06,
    invalid_channel = 0x0B,
    cbor_unexpected_type = 0x11,
    invalid_cbor = 0x12,
    missing_parameter = 0x14,
    credential_excluded = 0x19,
    unsupported_algorithm = 0x26,
    operation_denied = 0x27,
    unsupported_option = 0x2B,
    invalid_option = 0x2C,
    keepalive_cancel = 0x2D,
    no_credentials = 0x2E,
    not_allowed = 0x30,
    pin_invalid = 0x31,
    pin_blocked = 0x32,
    pin_auth_invalid = 0x33,
    pin_not_set = 0x35,
    pin_required = 0x36,
    pin_policy_violation = 0x37,
    other = 0x7F,
};

const char* status_name(Status s);

/// Raised anywhere in request processing; caught at the CBOR dispatch
/// boundary and turned into a status-only response.
class CtapError : public std::runtime_error {
public:
    CtapError(Status status, const std::string& what) : std::runtime_error(what), status_(status) {}
    explicit CtapError(Status status) : CtapError(status, status_name(status)) {}

    Status status() const noexcept { return status_; }

private:
    Status status_;
};

} // namespace vauth::ctap2
