#include "ctap2/status.hpp"

namespace vauth::ctap2 {

const char* status_name(Status s)
{
    switch (s) {
    case Status::ok: return "CTAP2_OK";
    case Status::invalid_command: return "CTAP1_ERR_INVALID_COMMAND";
    case Status::invalid_parameter: return "CTAP1_ERR_INVALID_PARAMETER";
    case Status::invalid_length: return "CTAP1_ERR_INVALID_LENGTH";
    case Status::invalid_seq: return "CTAP1_ERR_INVALID_SEQ";
    case Status::timeout: return "CTAP1_ERR_TIMEOUT";
    case Status::channel_busy: return "CTAP1_ERR_CHANNEL_BUSY";
    case Status::invalid_channel: return "CTAP1_ERR_INVALID_CHANNEL";
    case Status::cbor_unexpected_type: return "CTAP2_ERR_CBOR_UNEXPECTED_TYPE";
    case Status::invalid_cbor: return "CTAP2_ERR_INVALID_CBOR";
    case Status::missing_parameter: return "CTAP2_ERR_MISSING_PARAMETER";
    case Status::credential_excluded: return "CTAP2_ERR_CREDENTIAL_EXCLUDED";
    case Status::unsupported_algorithm: return "CTAP2_ERR_UNSUPPORTED_ALGORITHM";
    case Status::operation_denied: return "CTAP2_ERR_OPERATION_DENIED";
    case Status::unsupported_option: return "CTAP2_ERR_UNSUPPORTED_OPTION";
    case Status::invalid_option: return "CTAP2_ERR_INVALID_OPTION";
    case Status::keepalive_cancel: return "CTAP2_ERR_KEEPALIVE_CANCEL";
    case Status::no_credentials: return "CTAP2_ERR_NO_CREDENTIALS";
    case Status::not_allowed: return "CTAP2_ERR_NOT_ALLOWED";
    case Status::pin_invalid: return "CTAP2_ERR_PIN_INVALID";
    case Status::pin_blocked: return "CTAP2_ERR_PIN_BLOCKED";
    case Status::pin_auth_invalid: return "CTAP2_ERR_PIN_AUTH_INVALID";
    case Status::pin_not_set: return "CTAP2_ERR_PIN_NOT_SET";
    case Status::pin_required: return "CTAP2_ERR_PIN_REQUIRED";
    case Status::pin_policy_violation: return "CTAP2_ERR_PIN_POLICY_VIOLATION";
    case Status::other: return "CTAP1_ERR_OTHER";
    }
    return "CTAP_ERR_UNKNOWN";
}

} // namespace vauth::ctap2
