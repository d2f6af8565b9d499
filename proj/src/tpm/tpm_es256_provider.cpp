#include "tpm/tpm_es256_provider.hpp"

#include <fstream>

#include "crypto/es256_provider.hpp"
#include "crypto/p256.hpp"
#include "ctap2/cose.hpp"
#include "vauth/web_authn_tpm.h"

namespace vauth::tpm {

namespace fs = std::filesystem;

namespace {

Byte_array arr(ByteView b)
{
    return Byte_array{static_cast<uint16_t>(b.size()), const_cast<Byte*>(b.data())};
}

Byte_array arr(const std::string& s)
{
    return Byte_array{static_cast<uint16_t>(s.size()), reinterpret_cast<Byte*>(const_cast<char*>(s.data()))};
}

Bytes copy(Byte_array a) { return a.size == 0 ? Bytes{} : Bytes(a.data, a.data + a.size); }

// Blob files are CBOR maps {1: public_data, 2: private_data}.
Bytes encode_blob(const Bytes& pub, const Bytes& priv) { return cbor::encode(cbor::Map{{1, pub}, {2, priv}}); }

class TpmPrivateKey : public crypto::PrivateKey {
public:
    TpmPrivateKey(TpmEs256Provider& provider, Bytes encoded) : provider_(provider), encoded_(std::move(encoded)) {}

    Bytes sign(ByteView message) const override { return provider_.sign_with(encoded_, message); }
    Bytes encoded() const override { return encoded_; }

private:
    TpmEs256Provider& provider_;
    Bytes encoded_;
};

} // namespace

TpmEs256Provider::TpmEs256Provider(const fs::path& data_dir, const std::string& user,
                                   const std::string& user_password, int log_level)
    : user_(user), user_password_(user_password)
{
    tpm_ = install_tpm();
    if (!tpm_)
        throw crypto::CryptoError("cannot allocate TPM object");
    if (set_log_level(tpm_, log_level) != 0 || setup_tpm(tpm_, false, data_dir.c_str(), nullptr) != 0)
        fail("TPM setup failed");

    fs::path blob_path = data_dir / ("user_" + to_hex(to_bytes(user)) + ".blob");
    if (fs::exists(blob_path)) {
        std::ifstream in(blob_path, std::ios::binary);
        Bytes raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        Bytes pub, priv;
        try {
            auto v = cbor::decode(raw);
            pub = v.find(1)->as_bytes();
            priv = v.find(2)->as_bytes();
        } catch (const std::exception&) {
            fail("user key blob file is corrupt");
        }
        if (load_user_key(tpm_, Key_data{arr(pub), arr(priv)}, arr(user_)) != 0)
            fail("cannot load user key");
        // The user key loads without authorisation, so prove the password
        // now instead of on first use.
        auto probe = create_and_load_rp_key(tpm_, arr(std::string("password-check")), arr(user_password_),
                                            arr(std::string("password-check")));
        if (probe.key_point.x_coord.size == 0)
            fail("user password rejected");
        flush_data(tpm_);
        if (load_user_key(tpm_, Key_data{arr(pub), arr(priv)}, arr(user_)) != 0)
            fail("cannot reload user key");
    } else {
        Key_data kd = create_and_load_user_key(tpm_, arr(user_), arr(user_password_));
        if (kd.public_data.size == 0)
            fail("cannot create user key");
        Bytes file = encode_blob(copy(kd.public_data), copy(kd.private_data));
        std::ofstream out(blob_path, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(file.data()), static_cast<std::streamsize>(file.size()));
        if (!out)
            throw crypto::CryptoError("cannot write user key blob to " + blob_path.string());
    }
}

TpmEs256Provider::~TpmEs256Provider() { uninstall_tpm(tpm_); }

void TpmEs256Provider::fail(const std::string& what)
{
    std::string detail = tpm_ ? get_last_error(tpm_) : "";
    throw crypto::CryptoError(what + (detail.empty() ? "" : ": " + detail));
}

std::int64_t TpmEs256Provider::algorithm() const { return ctap2::cose_alg::es256; }

Bytes TpmEs256Provider::rp_auth_for(ByteView label) const
{
    // RP key passwords are supplied by the authenticator, never the user.
    Bytes material = to_bytes("rp-key-auth:");
    append(material, label);
    append(material, to_bytes(user_password_));
    return crypto::sha256_bytes(material);
}

TpmEs256Provider::Decoded TpmEs256Provider::decode(ByteView encoded)
{
    try {
        auto v = cbor::decode(encoded);
        const auto* label = v.find(1);
        const auto* pub = v.find(2);
        const auto* priv = v.find(3);
        if (!label || !pub || !priv)
            throw crypto::CryptoError("TPM key encoding is missing fields");
        return Decoded{label->as_bytes(), pub->as_bytes(), priv->as_bytes()};
    } catch (const cbor::DecodeError& e) {
        throw crypto::CryptoError(std::string("corrupt TPM key encoding: ") + e.what());
    } catch (const cbor::TypeError& e) {
        throw crypto::CryptoError(std::string("corrupt TPM key encoding: ") + e.what());
    }
}

crypto::KeyPair TpmEs256Provider::generate()
{
    std::lock_guard lock(mu_);
    Bytes label = to_bytes("rp-" + to_hex(crypto::random_bytes(12)));
    Bytes rp_auth = rp_auth_for(label);
    Relying_party_key key = create_and_load_rp_key(tpm_, arr(label), arr(user_password_), arr(rp_auth));
    if (key.key_point.x_coord.size != 32)
        fail("cannot create relying party key");
    crypto::EcPoint point{copy(key.key_point.x_coord), copy(key.key_point.y_coord)};
    Bytes encoded = cbor::encode(
        cbor::Map{{1, label}, {2, copy(key.key_blob.public_data)}, {3, copy(key.key_blob.private_data)}});
    return crypto::KeyPair{std::make_shared<crypto::Es256PublicKey>(crypto::P256Key::from_public(point)),
                           std::make_shared<TpmPrivateKey>(*this, std::move(encoded))};
}

crypto::KeyPair TpmEs256Provider::load(ByteView encoded)
{
    Decoded d = decode(encoded);
    std::lock_guard lock(mu_);
    Key_ecc_point p = load_rp_key(tpm_, Key_data{arr(d.public_data), arr(d.private_data)}, arr(d.label),
                                  arr(user_password_));
    if (p.x_coord.size != 32)
        fail("cannot load relying party key");
    crypto::EcPoint point{copy(p.x_coord), copy(p.y_coord)};
    return crypto::KeyPair{std::make_shared<crypto::Es256PublicKey>(crypto::P256Key::from_public(point)),
                           std::make_shared<TpmPrivateKey>(*this, Bytes(encoded.begin(), encoded.end()))};
}

std::shared_ptr<const crypto::PublicKey> TpmEs256Provider::load_public(const cbor::Value& cose)
{
    return crypto::Es256Provider{}.load_public(cose);
}

Bytes TpmEs256Provider::sign_with(ByteView encoded, ByteView message)
{
    Decoded d = decode(encoded);
    std::lock_guard lock(mu_);
    Key_ecc_point p = load_rp_key(tpm_, Key_data{arr(d.public_data), arr(d.private_data)}, arr(d.label),
                                  arr(user_password_));
    if (p.x_coord.size == 0)
        fail("cannot load relying party key for signing");
    auto digest = crypto::sha256(message);
    Bytes rp_auth = rp_auth_for(d.label);
    Ecdsa_sig sig = sign_using_rp_key(tpm_, arr(d.label), arr(ByteView(digest)), arr(rp_auth));
    if (sig.sig_r.size != 32 || sig.sig_s.size != 32)
        fail("TPM signing failed");
    return crypto::der_from_raw(crypto::RawSignature{copy(sig.sig_r), copy(sig.sig_s)});
}

} // namespace vauth::tpm
