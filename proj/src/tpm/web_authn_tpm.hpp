#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "common/bytes.hpp"
#include "crypto/p256.hpp"

namespace vauth::tpm {

using Rc = std::int32_t;

namespace rc {
constexpr Rc success = 0x000;
constexpr Rc value = 0x084;
constexpr Rc handle = 0x08B;
constexpr Rc auth_fail = 0x08E;
constexpr Rc size = 0x095;
constexpr Rc integrity = 0x09F;
constexpr Rc initialize = 0x100;
constexpr Rc failure = 0x101;
} // namespace rc

struct KeyBlob {
    Bytes public_data;
    Bytes private_data; // encrypted under the parent key

    bool operator==(const KeyBlob&) const = default;
};

struct RpKey {
    KeyBlob key_blob;
    crypto::EcPoint key_point;
};

/// Software stand-in for a TPM holding a three-level key hierarchy:
/// a persistent storage root key (SRK), password-protected user storage
/// keys, and relying-party P-256 signing keys. At most one user key and one
/// RP key are loaded at a time. Nothing here throws; failures return an
/// error code or nullopt and set the last-error string.
///
/// Blob private part: nonce(12) || AES-256-GCM(parent, aad, material ||
/// SHA-256(auth) || label) where aad binds the key kind, the blob's public
/// part and the parent's public part. Not interoperable with real TPM2B blobs.
class WebAuthnTpm {
public:
    WebAuthnTpm() = default;
    ~WebAuthnTpm();
    WebAuthnTpm(const WebAuthnTpm&) = delete;
    WebAuthnTpm& operator=(const WebAuthnTpm&) = delete;

    Rc setup(bool use_hw_tpm, const std::string& data_dir, const std::string& log_filename) noexcept;
    Rc set_log_level(int level) noexcept;
    std::string get_last_error() noexcept;

    std::optional<KeyBlob> create_and_load_user_key(ByteView user, ByteView key_auth) noexcept;
    Rc load_user_key(const KeyBlob& kd, ByteView user) noexcept;
    std::optional<RpKey> create_and_load_rp_key(ByteView relying_party, ByteView user_auth,
                                                ByteView rp_key_auth) noexcept;
    std::optional<crypto::EcPoint> load_rp_key(const KeyBlob& kd, ByteView relying_party,
                                               ByteView user_auth) noexcept;
    std::optional<crypto::RawSignature> sign_using_rp_key(ByteView relying_party, ByteView digest,
                                                          ByteView rp_key_auth) noexcept;
    Rc flush_data() noexcept;

    bool is_setup() const { return !srk_.empty(); }
    const std::filesystem::path& log_path() const { return log_path_; }

private:
    struct UserSlot {
        Bytes label;
        Bytes key;
        Bytes auth_digest;
        Bytes public_data;
    };
    struct RpSlot {
        Bytes label;
        crypto::P256Key key;
        Bytes auth_digest;
    };

    Rc fail(Rc code, const std::string& message) noexcept;
    void log(int level, const std::string& message) noexcept;
    void flush_user() noexcept;
    void flush_rp() noexcept;

    Bytes srk_;
    std::optional<UserSlot> user_;
    std::optional<RpSlot> rp_;
    std::string last_error_;
    int log_level_ = 1;
    std::filesystem::path data_dir_;
    std::filesystem::path log_path_;
    std::ofstream log_;
};

} // namespace vauth::tpm
