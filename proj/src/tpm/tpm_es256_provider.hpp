#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

#include "crypto/provider.hpp"

namespace vauth::tpm {

/// ES256 provider whose private keys live in the simulated TPM. It talks to
/// the TPM only through the C boundary in vauth/web_authn_tpm.h. Each
/// generated key is a relying-party key under one user storage key; the
/// user key blob is kept in the TPM data directory and reloaded on start.
class TpmEs256Provider : public crypto::CryptoProvider {
public:
    /// Throws crypto::CryptoError when the TPM cannot be set up or the
    /// user key cannot be created or loaded (e.g. wrong password).
    TpmEs256Provider(const std::filesystem::path& data_dir, const std::string& user,
                     const std::string& user_password, int log_level = 1);
    ~TpmEs256Provider() override;

    std::int64_t algorithm() const override;
    std::string name() const override { return "es256-tpm"; }
    crypto::KeyPair generate() override;
    crypto::KeyPair load(ByteView encoded) override;
    std::shared_ptr<const crypto::PublicKey> load_public(const cbor::Value& cose) override;

    /// DER signature over SHA-256(message) using the key described by `encoded`.
    Bytes sign_with(ByteView encoded, ByteView message);

private:
    struct Decoded {
        Bytes label;
        Bytes public_data;
        Bytes private_data;
    };
    static Decoded decode(ByteView encoded);
    Bytes rp_auth_for(ByteView label) const;
    [[noreturn]] void fail(const std::string& what);

    std::mutex mu_;
    void* tpm_ = nullptr;
    std::string user_;
    std::string user_password_;
};

} // namespace vauth::tpm
