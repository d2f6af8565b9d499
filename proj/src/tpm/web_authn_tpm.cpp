#include "tpm/web_authn_tpm.hpp"

#include <system_error>

#include "common/timestamp.hpp"
#include "crypto/primitives.hpp"

namespace vauth::tpm {

namespace fs = std::filesystem;

namespace {

constexpr std::uint8_t kKindUser = 0x01;
constexpr std::uint8_t kKindRp = 0x02;
constexpr std::size_t kMaterialSize = 32;
constexpr std::size_t kNonceSize = 12;
constexpr const char* kSrkFile = "srk.bin";

Bytes aad_for(std::uint8_t kind, ByteView parent_public, ByteView public_data)
{
    Bytes aad = to_bytes("vauth-tpm-sim/1");
    aad.push_back(kind);
    put_u16_be(aad, static_cast<std::uint16_t>(parent_public.size()));
    append(aad, parent_public);
    append(aad, public_data);
    return aad;
}

Bytes seal(ByteView parent_key, ByteView aad, ByteView plaintext)
{
    Bytes nonce = crypto::random_bytes(kNonceSize);
    Bytes out = nonce;
    append(out, crypto::aes256_gcm_seal(parent_key, nonce, aad, plaintext));
    return out;
}

std::optional<Bytes> unseal(ByteView parent_key, ByteView aad, ByteView blob)
{
    if (blob.size() < kNonceSize + 16)
        return std::nullopt;
    return crypto::aes256_gcm_open(parent_key, blob.first(kNonceSize), aad, blob.subspan(kNonceSize));
}

struct Sensitive {
    Bytes material;
    Bytes auth_digest;
    Bytes label;
};

Bytes pack_sensitive(ByteView material, ByteView auth, ByteView label)
{
    Bytes pt(material.begin(), material.end());
    append(pt, crypto::sha256_bytes(auth));
    append(pt, label);
    return pt;
}

std::optional<Sensitive> unpack_sensitive(Bytes pt)
{
    if (pt.size() < 2 * kMaterialSize)
        return std::nullopt;
    Sensitive s;
    s.material.assign(pt.begin(), pt.begin() + kMaterialSize);
    s.auth_digest.assign(pt.begin() + kMaterialSize, pt.begin() + 2 * kMaterialSize);
    s.label.assign(pt.begin() + 2 * kMaterialSize, pt.end());
    crypto::cleanse(pt);
    return s;
}

Bytes encode_point(const crypto::EcPoint& p)
{
    Bytes out{0x04};
    append(out, p.x);
    append(out, p.y);
    return out;
}

std::string printable(ByteView label) { return to_string(label); }

} // namespace

WebAuthnTpm::~WebAuthnTpm()
{
    flush_data();
    crypto::cleanse(srk_);
}

Rc WebAuthnTpm::fail(Rc code, const std::string& message) noexcept
{
    try {
        last_error_ = message;
        log(1, "error: " + message);
    } catch (...) {
    }
    return code;
}

void WebAuthnTpm::log(int level, const std::string& message) noexcept
{
    if (level > log_level_ || !log_.is_open())
        return;
    try {
        log_ << iso_timestamp() << " [" << level << "] " << message << '\n';
        log_.flush();
    } catch (...) {
    }
}

void WebAuthnTpm::flush_rp() noexcept
{
    if (rp_) {
        log(3, "flushing relying party key '" + printable(rp_->label) + "'");
        rp_.reset();
    }
}

void WebAuthnTpm::flush_user() noexcept
{
    flush_rp();
    if (user_) {
        log(3, "flushing user key '" + printable(user_->label) + "'");
        crypto::cleanse(user_->key);
        user_.reset();
    }
}

Rc WebAuthnTpm::setup(bool use_hw_tpm, const std::string& data_dir, const std::string& log_filename) noexcept
{
    try {
        if (use_hw_tpm)
            return fail(rc::failure, "hardware TPM support is not available; use the simulator");
        if (data_dir.empty())
            return fail(rc::value, "TPM data directory must not be empty");
        std::error_code ec;
        fs::create_directories(data_dir, ec);
        if (ec || !fs::is_directory(data_dir))
            return fail(rc::failure, "cannot create TPM data directory '" + data_dir + "': " + ec.message());
        data_dir_ = data_dir;

        fs::path log_name = log_filename.empty() ? fs::path("tpm_log_" + file_timestamp()) : fs::path(log_filename);
        log_path_ = log_name.is_absolute() ? log_name : data_dir_ / log_name;
        log_.close();
        log_.open(log_path_, std::ios::app);

        fs::path srk_path = data_dir_ / kSrkFile;
        if (fs::exists(srk_path)) {
            std::ifstream in(srk_path, std::ios::binary);
            Bytes srk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            if (srk.size() != kMaterialSize)
                return fail(rc::integrity, "storage root key file '" + srk_path.string() + "' is corrupt");
            srk_ = std::move(srk);
            log(2, "loaded persistent storage root key");
        } else {
            Bytes srk = crypto::random_bytes(kMaterialSize);
            fs::path tmp = srk_path;
            tmp += ".tmp";
            {
                std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                out.write(reinterpret_cast<const char*>(srk.data()), static_cast<std::streamsize>(srk.size()));
                if (!out)
                    return fail(rc::failure, "cannot write storage root key to '" + data_dir + "'");
            }
            fs::rename(tmp, srk_path, ec);
            if (ec)
                return fail(rc::failure, "cannot persist storage root key: " + ec.message());
            srk_ = std::move(srk);
            log(2, "created persistent storage root key");
        }
        flush_user();
        return rc::success;
    } catch (const std::exception& e) {
        return fail(rc::failure, std::string("setup failed: ") + e.what());
    }
}

Rc WebAuthnTpm::set_log_level(int level) noexcept
{
    if (level < 1 || level > 3)
        return fail(rc::value, "log level must be 1, 2 or 3, got " + std::to_string(level));
    log_level_ = level;
    return rc::success;
}

std::string WebAuthnTpm::get_last_error() noexcept
{
    std::string out;
    out.swap(last_error_);
    return out;
}

std::optional<KeyBlob> WebAuthnTpm::create_and_load_user_key(ByteView user, ByteView key_auth) noexcept
{
    try {
        if (!is_setup()) {
            fail(rc::initialize, "TPM not set up");
            return std::nullopt;
        }
        if (user.empty()) {
            fail(rc::value, "user name must not be empty");
            return std::nullopt;
        }
        flush_user();
        Bytes key = crypto::random_bytes(kMaterialSize);
        KeyBlob blob;
        blob.public_data = crypto::sha256_bytes(key);
        Bytes srk_public = crypto::sha256_bytes(srk_);
        Bytes pt = pack_sensitive(key, key_auth, user);
        blob.private_data = seal(srk_, aad_for(kKindUser, srk_public, blob.public_data), pt);
        crypto::cleanse(pt);
        user_ = UserSlot{Bytes(user.begin(), user.end()), std::move(key), crypto::sha256_bytes(key_auth),
                         blob.public_data};
        log(2, "created and loaded user key '" + printable(user) + "'");
        return blob;
    } catch (const std::exception& e) {
        fail(rc::failure, std::string("create_and_load_user_key failed: ") + e.what());
        return std::nullopt;
    }
}

Rc WebAuthnTpm::load_user_key(const KeyBlob& kd, ByteView user) noexcept
{
    try {
        if (!is_setup())
            return fail(rc::initialize, "TPM not set up");
        flush_user();
        Bytes srk_public = crypto::sha256_bytes(srk_);
        auto pt = unseal(srk_, aad_for(kKindUser, srk_public, kd.public_data), kd.private_data);
        if (!pt)
            return fail(rc::integrity, "user key blob failed to unwrap under the storage root key");
        auto s = unpack_sensitive(std::move(*pt));
        if (!s)
            return fail(rc::integrity, "user key blob has a malformed sensitive area");
        if (!crypto::constant_time_equal(s->label, user))
            return fail(rc::value, "user key blob does not belong to user '" + printable(user) + "'");
        if (crypto::sha256_bytes(s->material) != kd.public_data)
            return fail(rc::integrity, "user key public area does not match its private area");
        user_ = UserSlot{std::move(s->label), std::move(s->material), std::move(s->auth_digest), kd.public_data};
        log(2, "loaded user key '" + printable(user) + "'");
        return rc::success;
    } catch (const std::exception& e) {
        return fail(rc::failure, std::string("load_user_key failed: ") + e.what());
    }
}

std::optional<RpKey> WebAuthnTpm::create_and_load_rp_key(ByteView relying_party, ByteView user_auth,
                                                         ByteView rp_key_auth) noexcept
{
    try {
        if (!user_) {
            fail(rc::handle, "no user key loaded");
            return std::nullopt;
        }
        if (!crypto::constant_time_equal(crypto::sha256_bytes(user_auth), user_->auth_digest)) {
            fail(rc::auth_fail, "user authorisation failed");
            return std::nullopt;
        }
        if (relying_party.empty()) {
            fail(rc::value, "relying party name must not be empty");
            return std::nullopt;
        }
        flush_rp();
        auto key = crypto::P256Key::generate();
        RpKey out;
        out.key_point = key.public_point();
        out.key_blob.public_data = encode_point(out.key_point);
        Bytes scalar = key.private_scalar();
        Bytes pt = pack_sensitive(scalar, rp_key_auth, relying_party);
        crypto::cleanse(scalar);
        out.key_blob.private_data =
            seal(user_->key, aad_for(kKindRp, user_->public_data, out.key_blob.public_data), pt);
        crypto::cleanse(pt);
        rp_ = RpSlot{Bytes(relying_party.begin(), relying_party.end()), std::move(key),
                     crypto::sha256_bytes(rp_key_auth)};
        log(2, "created and loaded relying party key '" + printable(relying_party) + "'");
        return out;
    } catch (const std::exception& e) {
        fail(rc::failure, std::string("create_and_load_rp_key failed: ") + e.what());
        return std::nullopt;
    }
}

std::optional<crypto::EcPoint> WebAuthnTpm::load_rp_key(const KeyBlob& kd, ByteView relying_party,
                                                        ByteView user_auth) noexcept
{
    try {
        if (!user_) {
            fail(rc::handle, "no user key loaded");
            return std::nullopt;
        }
        if (!crypto::constant_time_equal(crypto::sha256_bytes(user_auth), user_->auth_digest)) {
            fail(rc::auth_fail, "user authorisation failed");
            return std::nullopt;
        }
        flush_rp();
        auto pt = unseal(user_->key, aad_for(kKindRp, user_->public_data, kd.public_data), kd.private_data);
        if (!pt) {
            fail(rc::integrity, "relying party key blob failed to unwrap under the loaded user key");
            return std::nullopt;
        }
        auto s = unpack_sensitive(std::move(*pt));
        if (!s) {
            fail(rc::integrity, "relying party key blob has a malformed sensitive area");
            return std::nullopt;
        }
        if (!crypto::constant_time_equal(s->label, relying_party)) {
            fail(rc::value, "relying party key blob does not belong to '" + printable(relying_party) + "'");
            return std::nullopt;
        }
        auto key = crypto::P256Key::from_private_scalar(s->material);
        crypto::cleanse(s->material);
        auto point = key.public_point();
        if (encode_point(point) != kd.public_data) {
            fail(rc::integrity, "relying party key public area does not match its private area");
            return std::nullopt;
        }
        rp_ = RpSlot{std::move(s->label), std::move(key), std::move(s->auth_digest)};
        log(2, "loaded relying party key '" + printable(relying_party) + "'");
        return point;
    } catch (const std::exception& e) {
        fail(rc::failure, std::string("load_rp_key failed: ") + e.what());
        return std::nullopt;
    }
}

std::optional<crypto::RawSignature> WebAuthnTpm::sign_using_rp_key(ByteView relying_party, ByteView digest,
                                                                   ByteView rp_key_auth) noexcept
{
    try {
        if (!rp_ || !crypto::constant_time_equal(rp_->label, relying_party)) {
            fail(rc::handle, "no key loaded for relying party '" + printable(relying_party) + "'");
            return std::nullopt;
        }
        if (digest.size() > 32) {
            fail(rc::size, "digest of " + std::to_string(digest.size()) + " bytes exceeds 32");
            return std::nullopt;
        }
        if (!crypto::constant_time_equal(crypto::sha256_bytes(rp_key_auth), rp_->auth_digest)) {
            fail(rc::auth_fail, "relying party key authorisation failed");
            return std::nullopt;
        }
        auto sig = rp_->key.sign_digest(digest);
        log(3, "signed " + std::to_string(digest.size()) + "-byte digest for '" + printable(relying_party) + "'");
        return sig;
    } catch (const std::exception& e) {
        fail(rc::failure, std::string("sign_using_rp_key failed: ") + e.what());
        return std::nullopt;
    }
}

Rc WebAuthnTpm::flush_data() noexcept
{
    flush_user();
    return rc::success;
}

} // namespace vauth::tpm
