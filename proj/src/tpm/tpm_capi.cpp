#include "vauth/web_authn_tpm.h"

#include <new>

#include "tpm/web_authn_tpm.hpp"

using vauth::Bytes;
using vauth::ByteView;
using vauth::tpm::WebAuthnTpm;

namespace {

// Result storage owned by the handle, per the boundary memory rule.
struct TpmHandle {
    WebAuthnTpm tpm;
    std::string error_out;
    Bytes user_pub, user_priv;
    Bytes rp_pub, rp_priv, rp_x, rp_y;
    Bytes point_x, point_y;
    Bytes sig_r, sig_s;
};

TpmHandle* handle_of(void* p) { return static_cast<TpmHandle*>(p); }

ByteView view(Byte_array a)
{
    if (a.size == 0 || a.data == nullptr)
        return {};
    return ByteView(a.data, a.size);
}

Byte_array expose(Bytes& storage)
{
    if (storage.empty())
        return Byte_array{0, nullptr};
    return Byte_array{static_cast<uint16_t>(storage.size()), storage.data()};
}

vauth::tpm::KeyBlob blob_of(Key_data kd)
{
    auto pub = view(kd.public_data);
    auto priv = view(kd.private_data);
    return vauth::tpm::KeyBlob{Bytes(pub.begin(), pub.end()), Bytes(priv.begin(), priv.end())};
}

constexpr Key_data kEmptyKeyData{{0, nullptr}, {0, nullptr}};
constexpr Key_ecc_point kEmptyPoint{{0, nullptr}, {0, nullptr}};
constexpr Ecdsa_sig kEmptySig{{0, nullptr}, {0, nullptr}};

} // namespace

extern "C" {

void* install_tpm(void) { return new (std::nothrow) TpmHandle(); }

int32_t setup_tpm(void* v_tpm_ptr, bool use_hw_tpm, const char* tpm_data_dir, const char* log_filename)
{
    if (v_tpm_ptr == nullptr)
        return VAUTH_TPM_RC_INITIALIZE;
    return handle_of(v_tpm_ptr)->tpm.setup(use_hw_tpm, tpm_data_dir ? tpm_data_dir : "",
                                           log_filename ? log_filename : "");
}

TPM_RC set_log_level(void* v_tpm_ptr, int log_level)
{
    if (v_tpm_ptr == nullptr)
        return VAUTH_TPM_RC_INITIALIZE;
    return handle_of(v_tpm_ptr)->tpm.set_log_level(log_level);
}

const char* get_last_error(void* v_tpm_ptr)
{
    if (v_tpm_ptr == nullptr)
        return "TPM not installed";
    auto* h = handle_of(v_tpm_ptr);
    h->error_out = h->tpm.get_last_error();
    return h->error_out.c_str();
}

void uninstall_tpm(void* v_tpm_ptr) { delete handle_of(v_tpm_ptr); }

Key_data create_and_load_user_key(void* v_tpm_ptr, Byte_array user, Byte_array key_auth)
{
    if (v_tpm_ptr == nullptr)
        return kEmptyKeyData;
    auto* h = handle_of(v_tpm_ptr);
    auto blob = h->tpm.create_and_load_user_key(view(user), view(key_auth));
    if (!blob)
        return kEmptyKeyData;
    h->user_pub = std::move(blob->public_data);
    h->user_priv = std::move(blob->private_data);
    return Key_data{expose(h->user_pub), expose(h->user_priv)};
}

TPM_RC load_user_key(void* v_tpm_ptr, Key_data kd, Byte_array user)
{
    if (v_tpm_ptr == nullptr)
        return VAUTH_TPM_RC_INITIALIZE;
    return handle_of(v_tpm_ptr)->tpm.load_user_key(blob_of(kd), view(user));
}

Relying_party_key create_and_load_rp_key(void* v_tpm_ptr, Byte_array relying_party, Byte_array user_auth,
                                         Byte_array rp_key_auth)
{
    if (v_tpm_ptr == nullptr)
        return Relying_party_key{kEmptyKeyData, kEmptyPoint};
    auto* h = handle_of(v_tpm_ptr);
    auto key = h->tpm.create_and_load_rp_key(view(relying_party), view(user_auth), view(rp_key_auth));
    if (!key)
        return Relying_party_key{kEmptyKeyData, kEmptyPoint};
    h->rp_pub = std::move(key->key_blob.public_data);
    h->rp_priv = std::move(key->key_blob.private_data);
    h->rp_x = std::move(key->key_point.x);
    h->rp_y = std::move(key->key_point.y);
    return Relying_party_key{Key_data{expose(h->rp_pub), expose(h->rp_priv)},
                             Key_ecc_point{expose(h->rp_x), expose(h->rp_y)}};
}

Key_ecc_point load_rp_key(void* v_tpm_ptr, Key_data kd, Byte_array relying_party, Byte_array user_auth)
{
    if (v_tpm_ptr == nullptr)
        return kEmptyPoint;
    auto* h = handle_of(v_tpm_ptr);
    auto point = h->tpm.load_rp_key(blob_of(kd), view(relying_party), view(user_auth));
    if (!point)
        return kEmptyPoint;
    h->point_x = std::move(point->x);
    h->point_y = std::move(point->y);
    return Key_ecc_point{expose(h->point_x), expose(h->point_y)};
}

Ecdsa_sig sign_using_rp_key(void* v_tpm_ptr, Byte_array relying_party, Byte_array signing_data,
                            Byte_array rp_key_auth)
{
    if (v_tpm_ptr == nullptr)
        return kEmptySig;
    auto* h = handle_of(v_tpm_ptr);
    auto sig = h->tpm.sign_using_rp_key(view(relying_party), view(signing_data), view(rp_key_auth));
    if (!sig)
        return kEmptySig;
    h->sig_r = std::move(sig->r);
    h->sig_s = std::move(sig->s);
    return Ecdsa_sig{expose(h->sig_r), expose(h->sig_s)};
}

TPM_RC flush_data(void* v_tpm_ptr)
{
    if (v_tpm_ptr == nullptr)
        return VAUTH_TPM_RC_INITIALIZE;
    return handle_of(v_tpm_ptr)->tpm.flush_data();
}

} // extern "C"
