#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cbor/cbor.hpp"
#include "common/bytes.hpp"
#include "ctap2/cose.hpp"
#include "ctap2/status.hpp"

namespace vauth::ctap2 {

enum class Command : std::uint8_t {
    make_credential = 0x01,
    get_assertion = 0x02,
    get_info = 0x04,
    client_pin = 0x06,
    reset = 0x07,
    get_next_assertion = 0x08,
};

const char* command_name(Command c);

enum class PinSubCommand : std::int64_t {
    get_retries = 1,
    get_key_agreement = 2,
    set_pin = 3,
    change_pin = 4,
    get_pin_token = 5,
};

constexpr std::size_t kClientDataHashSize = 32;
constexpr std::size_t kPinAuthSize = 16;
constexpr const char* kPublicKeyType = "public-key";

struct RpEntity {
    std::string id;
    std::optional<std::string> name;
    bool operator==(const RpEntity&) const = default;
};

struct UserEntity {
    Bytes id;
    std::optional<std::string> name;
    std::optional<std::string> display_name;
    bool operator==(const UserEntity&) const = default;
};

struct CredentialDescriptor {
    std::string type = kPublicKeyType;
    Bytes id;
    std::optional<std::vector<std::string>> transports;
    bool operator==(const CredentialDescriptor&) const = default;
};

struct CredentialParameter {
    std::string type = kPublicKeyType;
    std::int64_t alg = 0;
    bool operator==(const CredentialParameter&) const = default;
};

struct MakeCredentialParameters {
    Bytes client_data_hash;
    RpEntity rp;
    UserEntity user;
    std::vector<CredentialParameter> pub_key_cred_params;
    std::optional<std::vector<CredentialDescriptor>> exclude_list;
    std::optional<bool> rk;
    std::optional<bool> uv;
    std::optional<Bytes> pin_auth;
    std::optional<std::int64_t> pin_protocol;
    bool operator==(const MakeCredentialParameters&) const = default;
};

struct GetAssertionParameters {
    std::string rp_id;
    Bytes client_data_hash;
    std::optional<std::vector<CredentialDescriptor>> allow_list;
    std::optional<bool> up;
    std::optional<bool> uv;
    std::optional<Bytes> pin_auth;
    std::optional<std::int64_t> pin_protocol;
    bool operator==(const GetAssertionParameters&) const = default;
};

struct ClientPinParameters {
    std::int64_t pin_protocol = 1;
    PinSubCommand sub_command = PinSubCommand::get_retries;
    std::optional<CoseEc2Key> key_agreement;
    std::optional<Bytes> pin_auth;
    std::optional<Bytes> new_pin_enc;
    std::optional<Bytes> pin_hash_enc;
    bool operator==(const ClientPinParameters&) const = default;
};

struct GetInfoRequest {
    bool operator==(const GetInfoRequest&) const = default;
};
struct ResetRequest {
    bool operator==(const ResetRequest&) const = default;
};
struct GetNextAssertionRequest {
    bool operator==(const GetNextAssertionRequest&) const = default;
};

using Request = std::variant<MakeCredentialParameters, GetAssertionParameters, GetInfoRequest, ClientPinParameters,
                             ResetRequest, GetNextAssertionRequest>;

Command command_of(const Request& r);

/// `payload` is command byte || CBOR map. Throws CtapError with
/// invalid_command (0x01), invalid_length (0x03), cbor_unexpected_type
/// (0x11), invalid_cbor (0x12), missing_parameter (0x14),
/// invalid_parameter (0x02), unsupported_algorithm (0x26) or
/// invalid_option (0x2C). Never throws anything else.
Request decode_request(ByteView payload);

/// Command byte || canonical CBOR, as a client sends it.
Bytes encode_request(const Request& r);

// Response models.

struct AttestationStatement {
    std::int64_t alg = cose_alg::es256;
    Bytes sig;
    bool operator==(const AttestationStatement&) const = default;
};

struct MakeCredentialResponse {
    std::string fmt = "packed";
    Bytes auth_data;
    AttestationStatement att_stmt;
    bool operator==(const MakeCredentialResponse&) const = default;
};

struct GetAssertionResponse {
    CredentialDescriptor credential;
    Bytes auth_data;
    Bytes signature;
    std::optional<UserEntity> user;
    std::optional<std::int64_t> number_of_credentials;
    bool operator==(const GetAssertionResponse&) const = default;
};

struct GetInfoResponse {
    std::vector<std::string> versions;
    std::optional<std::vector<std::string>> extensions;
    Bytes aaguid;
    std::map<std::string, bool> options;
    std::optional<std::int64_t> max_msg_size;
    std::optional<std::vector<std::int64_t>> pin_protocols;
    std::optional<std::vector<std::int64_t>> algorithms; // COSE ids, emitted as {alg, type} maps
    bool operator==(const GetInfoResponse&) const = default;
};

struct ClientPinResponse {
    std::optional<CoseEc2Key> key_agreement;
    std::optional<Bytes> pin_token;
    std::optional<std::int64_t> retries;
    bool operator==(const ClientPinResponse&) const = default;
};

struct ResetResponse {
    bool operator==(const ResetResponse&) const = default;
};

using Response = std::variant<MakeCredentialResponse, GetAssertionResponse, GetInfoResponse, ClientPinResponse,
                              ResetResponse>;

/// Status 0x00 || canonical CBOR map; empty models give the status byte only.
Bytes encode_response(const Response& r);

/// Error-only response.
Bytes encode_status(Status s);

struct DecodedResponse {
    Status status = Status::ok;
    std::optional<Response> body; // set only for status ok
};

/// Client-side decoding. `for_command` picks the model; getNextAssertion
/// decodes as GetAssertionResponse. Throws CtapError(invalid_cbor or
/// cbor_unexpected_type or missing_parameter) on malformed bodies.
DecodedResponse decode_response(Command for_command, ByteView payload);

// Shared entity codecs (also used for credential source serialization).
cbor::Value encode_user(const UserEntity& u);
UserEntity decode_user(const cbor::Value& v);
cbor::Value encode_descriptor(const CredentialDescriptor& d);
CredentialDescriptor decode_descriptor(const cbor::Value& v);

} // namespace vauth::ctap2
