#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctap2/messages.hpp"
#include "hid/packet.hpp"
#include "transport/transport.hpp"

namespace vauth::transport {

/// CTAPHID ERROR reply or a protocol violation seen by the host.
class HidError : public std::runtime_error {
public:
    HidError(std::uint8_t code, const std::string& what) : std::runtime_error(what), code_(code) {}
    std::uint8_t code() const noexcept { return code_; }

private:
    std::uint8_t code_;
};

/// Non-zero CTAP2 status from the authenticator.
class CtapStatusError : public std::runtime_error {
public:
    explicit CtapStatusError(std::uint8_t status);
    std::uint8_t status() const noexcept { return status_; }

private:
    std::uint8_t status_;
};

/// The client's own checks on a response failed.
class VerificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Host side of CTAPHID: channel setup, message framing and keep-alive skipping.
class HidClient {
public:
    struct Reply {
        std::uint8_t cmd = 0;
        Bytes payload;
    };

    explicit HidClient(Transport& transport, std::chrono::milliseconds timeout = std::chrono::seconds(35))
        : transport_(transport), timeout_(timeout)
    {
    }

    /// Broadcast INIT; adopts the allocated channel.
    hid::ChannelId init();
    hid::ChannelId channel() const { return cid_; }
    void set_channel(hid::ChannelId cid) { cid_ = cid; }

    void send(std::uint8_t cmd, ByteView payload);
    /// Next complete message on this channel, skipping keep-alives.
    Reply receive();
    Reply transact(std::uint8_t cmd, ByteView payload);

    Bytes ping(ByteView data);
    void wink();
    /// Command byte || CBOR in, status || CBOR out. ERROR replies throw HidError.
    Bytes cbor(ByteView request);
    void cancel();

    std::uint64_t keepalives_seen() const { return keepalives_; }

private:
    Reply receive_on(hid::ChannelId cid);

    Transport& transport_;
    std::chrono::milliseconds timeout_;
    hid::ChannelId cid_ = hid::ChannelId::broadcast();
    std::uint64_t keepalives_ = 0;
};

/// What the client remembers about one registered credential.
struct CredentialRecord {
    std::string rp_id;
    Bytes credential_id;
    Bytes public_key; // COSE_Key encoding
    Bytes user_id;
    std::string user_name;
    std::optional<bool> resident; // as requested; unset means the authenticator default
    std::uint32_t sign_count = 0;
};

struct RecordBook {
    std::vector<CredentialRecord> credentials;

    CredentialRecord* find(ByteView credential_id);
    std::vector<CredentialRecord*> for_rp(const std::string& rp_id);
    void remove_all() { credentials.clear(); }

    std::string to_json() const;
    static RecordBook from_json(const std::string& text);
    static RecordBook load(const std::filesystem::path& path); // missing file gives an empty book
    void save(const std::filesystem::path& path) const;
};

struct RegisterOptions {
    std::string rp_id;
    std::optional<std::string> rp_name;
    Bytes user_id;
    std::string user_name;
    std::optional<std::string> display_name;
    std::optional<bool> resident;
    std::optional<std::string> pin;
    std::vector<Bytes> exclude;
};

struct RegisterResult {
    CredentialRecord record;
    Bytes auth_data;
    Bytes signature;
    Bytes client_data_hash;
    std::uint8_t flags = 0;
};

struct AssertOptions {
    std::string rp_id;
    std::vector<Bytes> allow; // empty: discoverable credentials
    std::optional<std::string> pin;
    std::optional<bool> up;
};

struct VerifiedAssertion {
    Bytes credential_id;
    Bytes auth_data;
    Bytes signature;
    std::uint32_t sign_count = 0;
    std::uint8_t flags = 0;
    std::optional<ctap2::UserEntity> user;
};

struct AssertResult {
    Bytes client_data_hash;
    std::int64_t number_of_credentials = 1;
    std::vector<VerifiedAssertion> assertions; // in the order the authenticator returned them
};

/// Conformance client: drives the authenticator over CTAPHID and verifies
/// every signature and counter against its record book.
class ConformanceClient {
public:
    ConformanceClient(Transport& transport, RecordBook& records);

    HidClient& hid() { return hid_; }
    void connect();

    ctap2::GetInfoResponse get_info();
    RegisterResult register_credential(const RegisterOptions& options);
    AssertResult assert_credential(const AssertOptions& options);

    std::int64_t pin_retries();
    void set_pin(const std::string& pin);
    void change_pin(const std::string& old_pin, const std::string& new_pin);
    Bytes pin_token(const std::string& pin);
    ctap2::CoseEc2Key key_agreement();

    /// Clears the record book on success.
    void reset();
    Bytes ping(ByteView data) { return hid_.ping(data); }

    /// Status byte of the last CTAP2 response.
    std::uint8_t last_status() const { return last_status_; }
    /// Highest signature counter observed from any response.
    std::uint32_t highest_counter() const { return highest_counter_; }

private:
    ctap2::DecodedResponse call(const ctap2::Request& request);
    VerifiedAssertion verify_assertion(const ctap2::GetAssertionResponse& r, const std::string& rp_id,
                                       ByteView client_data_hash);
    Bytes make_client_data_hash(const std::string& type, const std::string& rp_id);

    HidClient hid_;
    RecordBook& records_;
    bool connected_ = false;
    std::uint8_t last_status_ = 0;
    std::uint32_t highest_counter_ = 0;
};

} // namespace vauth::transport
