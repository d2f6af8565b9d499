#include "crypto/p256.hpp"

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/obj_mac.h>
#include <openssl/param_build.h>
#include <openssl/x509.h>

#include <algorithm>
#include <cstring>

namespace vauth::crypto {

namespace {

struct BnDeleter {
    void operator()(BIGNUM* b) const { BN_clear_free(b); }
};
using Bn = std::unique_ptr<BIGNUM, BnDeleter>;

struct GroupDeleter {
    void operator()(EC_GROUP* g) const { EC_GROUP_free(g); }
};
struct PointDeleter {
    void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
struct PkeyCtxDeleter {
    void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
};
struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
struct BldDeleter {
    void operator()(OSSL_PARAM_BLD* b) const { OSSL_PARAM_BLD_free(b); }
};
struct ParamDeleter {
    void operator()(OSSL_PARAM* p) const { OSSL_PARAM_free(p); }
};
struct SigDeleter {
    void operator()(ECDSA_SIG* s) const { ECDSA_SIG_free(s); }
};
struct P8Deleter {
    void operator()(PKCS8_PRIV_KEY_INFO* p) const { PKCS8_PRIV_KEY_INFO_free(p); }
};

using Group = std::unique_ptr<EC_GROUP, GroupDeleter>;
using Point = std::unique_ptr<EC_POINT, PointDeleter>;
using PkeyCtx = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;

constexpr const char* kGroupName = "prime256v1";

void require(bool ok, const char* what)
{
    if (!ok)
        throw CryptoError(what);
}

Group p256_group()
{
    Group g(EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1));
    require(g != nullptr, "cannot create P-256 group");
    return g;
}

Bn bn_from(ByteView b)
{
    Bn bn(BN_bin2bn(b.data(), static_cast<int>(b.size()), nullptr));
    require(bn != nullptr, "BN_bin2bn failed");
    return bn;
}

Bytes bn_to32(const BIGNUM* bn)
{
    Bytes out(32);
    require(BN_bn2binpad(bn, out.data(), 32) == 32, "value does not fit in 32 bytes");
    return out;
}

Bytes uncompressed(const EcPoint& p)
{
    Bytes out{0x04};
    append(out, p.x);
    append(out, p.y);
    return out;
}

EVP_PKEY* build_key(const BIGNUM* priv, const EcPoint& pub)
{
    std::unique_ptr<OSSL_PARAM_BLD, BldDeleter> bld(OSSL_PARAM_BLD_new());
    require(bld != nullptr, "OSSL_PARAM_BLD_new failed");
    Bytes pub_oct = uncompressed(pub);
    require(OSSL_PARAM_BLD_push_utf8_string(bld.get(), OSSL_PKEY_PARAM_GROUP_NAME, kGroupName, 0) == 1,
            "param push failed");
    require(OSSL_PARAM_BLD_push_octet_string(bld.get(), OSSL_PKEY_PARAM_PUB_KEY, pub_oct.data(),
                                             pub_oct.size()) == 1,
            "param push failed");
    if (priv)
        require(OSSL_PARAM_BLD_push_BN(bld.get(), OSSL_PKEY_PARAM_PRIV_KEY, priv) == 1, "param push failed");
    std::unique_ptr<OSSL_PARAM, ParamDeleter> params(OSSL_PARAM_BLD_to_param(bld.get()));
    require(params != nullptr, "OSSL_PARAM_BLD_to_param failed");

    PkeyCtx ctx(EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr));
    require(ctx != nullptr, "EVP_PKEY_CTX_new_from_name failed");
    require(EVP_PKEY_fromdata_init(ctx.get()) == 1, "EVP_PKEY_fromdata_init failed");
    EVP_PKEY* pkey = nullptr;
    require(EVP_PKEY_fromdata(ctx.get(), &pkey, priv ? EVP_PKEY_KEYPAIR : EVP_PKEY_PUBLIC_KEY,
                              params.get()) == 1,
            "EVP_PKEY_fromdata failed");
    return pkey;
}

bool is_p256(EVP_PKEY* pkey)
{
    if (!EVP_PKEY_is_a(pkey, "EC"))
        return false;
    char name[64] = {};
    std::size_t len = 0;
    if (EVP_PKEY_get_utf8_string_param(pkey, OSSL_PKEY_PARAM_GROUP_NAME, name, sizeof name, &len) != 1)
        return false;
    return std::strcmp(name, kGroupName) == 0;
}

struct BnCtxDeleter {
    void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};

// Seeded ECDSA used only under DeterministicRandomScope.
RawSignature seeded_sign(const BIGNUM* d, ByteView digest)
{
    auto group = p256_group();
    const BIGNUM* n = EC_GROUP_get0_order(group.get());
    std::unique_ptr<BN_CTX, BnCtxDeleter> ctx(BN_CTX_new());
    require(ctx != nullptr, "BN_CTX_new failed");
    Bn z = bn_from(digest.first(std::min<std::size_t>(digest.size(), 32)));
    for (;;) {
        Bn k = bn_from(random_bytes(32));
        if (BN_is_zero(k.get()) || BN_cmp(k.get(), n) >= 0)
            continue;
        Point rp(EC_POINT_new(group.get()));
        Bn x(BN_new()), r(BN_new()), s(BN_new()), kinv(BN_new()), t(BN_new());
        require(rp && x && r && s && kinv && t, "allocation failed");
        require(EC_POINT_mul(group.get(), rp.get(), k.get(), nullptr, nullptr, ctx.get()) == 1, "EC_POINT_mul failed");
        require(EC_POINT_get_affine_coordinates(group.get(), rp.get(), x.get(), nullptr, ctx.get()) == 1,
                "point coordinates failed");
        require(BN_nnmod(r.get(), x.get(), n, ctx.get()) == 1, "BN_nnmod failed");
        if (BN_is_zero(r.get()))
            continue;
        require(BN_mod_inverse(kinv.get(), k.get(), n, ctx.get()) != nullptr, "BN_mod_inverse failed");
        require(BN_mod_mul(t.get(), r.get(), d, n, ctx.get()) == 1, "BN_mod_mul failed");
        require(BN_mod_add(t.get(), t.get(), z.get(), n, ctx.get()) == 1, "BN_mod_add failed");
        require(BN_mod_mul(s.get(), kinv.get(), t.get(), n, ctx.get()) == 1, "BN_mod_mul failed");
        if (BN_is_zero(s.get()))
            continue;
        return RawSignature{bn_to32(r.get()), bn_to32(s.get())};
    }
}

} // namespace

void P256Key::Deleter::operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }

P256Key::P256Key(EVP_PKEY* pkey, bool has_private) : pkey_(pkey), has_private_(has_private) {}

P256Key::P256Key(const P256Key& other) : has_private_(other.has_private_)
{
    EVP_PKEY_up_ref(other.pkey_.get());
    pkey_.reset(other.pkey_.get());
}

P256Key& P256Key::operator=(const P256Key& other)
{
    if (this != &other) {
        EVP_PKEY_up_ref(other.pkey_.get());
        pkey_.reset(other.pkey_.get());
        has_private_ = other.has_private_;
    }
    return *this;
}

P256Key::~P256Key() = default;

P256Key P256Key::generate()
{
    if (deterministic_random_active()) {
        auto group = p256_group();
        for (;;) {
            Bytes scalar = random_bytes(32);
            Bn d = bn_from(scalar);
            if (!BN_is_zero(d.get()) && BN_cmp(d.get(), EC_GROUP_get0_order(group.get())) < 0)
                return from_private_scalar(scalar);
        }
    }
    EVP_PKEY* pkey = EVP_EC_gen(kGroupName);
    require(pkey != nullptr, "P-256 key generation failed");
    return P256Key(pkey, true);
}

P256Key P256Key::from_private_scalar(ByteView scalar)
{
    require(scalar.size() == 32, "P-256 scalar must be 32 bytes");
    auto group = p256_group();
    Bn d = bn_from(scalar);
    require(!BN_is_zero(d.get()) && BN_cmp(d.get(), EC_GROUP_get0_order(group.get())) < 0,
            "P-256 scalar out of range");
    Point q(EC_POINT_new(group.get()));
    require(q != nullptr, "EC_POINT_new failed");
    require(EC_POINT_mul(group.get(), q.get(), d.get(), nullptr, nullptr, nullptr) == 1, "EC_POINT_mul failed");
    Bn x(BN_new()), y(BN_new());
    require(EC_POINT_get_affine_coordinates(group.get(), q.get(), x.get(), y.get(), nullptr) == 1,
            "point coordinates failed");
    return P256Key(build_key(d.get(), EcPoint{bn_to32(x.get()), bn_to32(y.get())}), true);
}

P256Key P256Key::from_pkcs8(ByteView der)
{
    const unsigned char* p = der.data();
    std::unique_ptr<PKCS8_PRIV_KEY_INFO, P8Deleter> p8(
        d2i_PKCS8_PRIV_KEY_INFO(nullptr, &p, static_cast<long>(der.size())));
    require(p8 != nullptr, "malformed PKCS#8 private key");
    require(p == der.data() + der.size(), "trailing bytes after PKCS#8 private key");
    EVP_PKEY* pkey = EVP_PKCS82PKEY(p8.get());
    require(pkey != nullptr, "unsupported PKCS#8 private key");
    P256Key key(pkey, true);
    require(is_p256(pkey), "PKCS#8 key is not a P-256 key");
    return key;
}

P256Key P256Key::from_public(const EcPoint& point)
{
    require(is_on_curve(point.x, point.y), "point is not on P-256");
    return P256Key(build_key(nullptr, point), false);
}

EcPoint P256Key::public_point() const
{
    BIGNUM* x = nullptr;
    BIGNUM* y = nullptr;
    require(EVP_PKEY_get_bn_param(pkey_.get(), OSSL_PKEY_PARAM_EC_PUB_X, &x) == 1, "no public x");
    Bn xs(x);
    require(EVP_PKEY_get_bn_param(pkey_.get(), OSSL_PKEY_PARAM_EC_PUB_Y, &y) == 1, "no public y");
    Bn ys(y);
    return EcPoint{bn_to32(xs.get()), bn_to32(ys.get())};
}

Bytes P256Key::private_scalar() const
{
    require(has_private_, "public-only key");
    BIGNUM* d = nullptr;
    require(EVP_PKEY_get_bn_param(pkey_.get(), OSSL_PKEY_PARAM_PRIV_KEY, &d) == 1, "no private scalar");
    Bn ds(d);
    return bn_to32(ds.get());
}

Bytes P256Key::pkcs8() const
{
    require(has_private_, "public-only key");
    std::unique_ptr<PKCS8_PRIV_KEY_INFO, P8Deleter> p8(EVP_PKEY2PKCS8(pkey_.get()));
    require(p8 != nullptr, "PKCS#8 encoding failed");
    int len = i2d_PKCS8_PRIV_KEY_INFO(p8.get(), nullptr);
    require(len > 0, "PKCS#8 encoding failed");
    Bytes out(static_cast<std::size_t>(len));
    unsigned char* p = out.data();
    i2d_PKCS8_PRIV_KEY_INFO(p8.get(), &p);
    return out;
}

Bytes P256Key::sign(ByteView message) const
{
    require(has_private_, "public-only key cannot sign");
    if (deterministic_random_active())
        return der_from_raw(sign_digest(sha256(message)));
    std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> md(EVP_MD_CTX_new());
    require(md != nullptr, "EVP_MD_CTX_new failed");
    require(EVP_DigestSignInit(md.get(), nullptr, EVP_sha256(), nullptr, pkey_.get()) == 1,
            "DigestSignInit failed");
    std::size_t len = 0;
    require(EVP_DigestSign(md.get(), nullptr, &len, message.data(), message.size()) == 1, "DigestSign failed");
    Bytes sig(len);
    require(EVP_DigestSign(md.get(), sig.data(), &len, message.data(), message.size()) == 1,
            "DigestSign failed");
    sig.resize(len);
    return sig;
}

RawSignature P256Key::sign_digest(ByteView digest) const
{
    require(has_private_, "public-only key cannot sign");
    if (deterministic_random_active()) {
        Bn d = bn_from(private_scalar());
        return seeded_sign(d.get(), digest);
    }
    PkeyCtx ctx(EVP_PKEY_CTX_new(pkey_.get(), nullptr));
    require(ctx != nullptr && EVP_PKEY_sign_init(ctx.get()) == 1, "sign init failed");
    std::size_t len = 0;
    require(EVP_PKEY_sign(ctx.get(), nullptr, &len, digest.data(), digest.size()) == 1, "sign failed");
    Bytes der(len);
    require(EVP_PKEY_sign(ctx.get(), der.data(), &len, digest.data(), digest.size()) == 1, "sign failed");
    der.resize(len);
    return raw_from_der(der);
}

bool P256Key::verify(ByteView message, ByteView der_signature) const
{
    std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> md(EVP_MD_CTX_new());
    if (!md || EVP_DigestVerifyInit(md.get(), nullptr, EVP_sha256(), nullptr, pkey_.get()) != 1)
        return false;
    return EVP_DigestVerify(md.get(), der_signature.data(), der_signature.size(), message.data(),
                            message.size()) == 1;
}

bool P256Key::verify_digest(ByteView digest, ByteView der_signature) const
{
    PkeyCtx ctx(EVP_PKEY_CTX_new(pkey_.get(), nullptr));
    if (!ctx || EVP_PKEY_verify_init(ctx.get()) != 1)
        return false;
    return EVP_PKEY_verify(ctx.get(), der_signature.data(), der_signature.size(), digest.data(),
                           digest.size()) == 1;
}

Bytes P256Key::ecdh_x(const P256Key& peer) const
{
    require(has_private_, "ECDH requires a private key");
    PkeyCtx ctx(EVP_PKEY_CTX_new(pkey_.get(), nullptr));
    require(ctx != nullptr && EVP_PKEY_derive_init(ctx.get()) == 1, "derive init failed");
    require(EVP_PKEY_derive_set_peer(ctx.get(), peer.pkey_.get()) == 1, "derive peer failed");
    std::size_t len = 0;
    require(EVP_PKEY_derive(ctx.get(), nullptr, &len) == 1, "derive failed");
    Bytes out(len);
    require(EVP_PKEY_derive(ctx.get(), out.data(), &len) == 1, "derive failed");
    out.resize(len);
    return out;
}

bool P256Key::is_on_curve(ByteView x, ByteView y)
{
    if (x.size() != 32 || y.size() != 32)
        return false;
    auto group = p256_group();
    Bn p(BN_new()), a(BN_new()), b(BN_new());
    if (EC_GROUP_get_curve(group.get(), p.get(), a.get(), b.get(), nullptr) != 1)
        return false;
    Bn bx = bn_from(x), by = bn_from(y);
    if (BN_cmp(bx.get(), p.get()) >= 0 || BN_cmp(by.get(), p.get()) >= 0)
        return false;
    Point pt(EC_POINT_new(group.get()));
    if (!pt || EC_POINT_set_affine_coordinates(group.get(), pt.get(), bx.get(), by.get(), nullptr) != 1)
        return false;
    return EC_POINT_is_on_curve(group.get(), pt.get(), nullptr) == 1;
}

Bytes der_from_raw(const RawSignature& sig)
{
    std::unique_ptr<ECDSA_SIG, SigDeleter> s(ECDSA_SIG_new());
    require(s != nullptr, "ECDSA_SIG_new failed");
    BIGNUM* r = BN_bin2bn(sig.r.data(), static_cast<int>(sig.r.size()), nullptr);
    BIGNUM* sv = BN_bin2bn(sig.s.data(), static_cast<int>(sig.s.size()), nullptr);
    if (!r || !sv || ECDSA_SIG_set0(s.get(), r, sv) != 1) {
        BN_free(r);
        BN_free(sv);
        throw CryptoError("ECDSA_SIG_set0 failed");
    }
    int len = i2d_ECDSA_SIG(s.get(), nullptr);
    require(len > 0, "signature encoding failed");
    Bytes out(static_cast<std::size_t>(len));
    unsigned char* p = out.data();
    i2d_ECDSA_SIG(s.get(), &p);
    return out;
}

RawSignature raw_from_der(ByteView der)
{
    const unsigned char* p = der.data();
    std::unique_ptr<ECDSA_SIG, SigDeleter> s(d2i_ECDSA_SIG(nullptr, &p, static_cast<long>(der.size())));
    require(s != nullptr, "malformed DER signature");
    return RawSignature{bn_to32(ECDSA_SIG_get0_r(s.get())), bn_to32(ECDSA_SIG_get0_s(s.get()))};
}

} // namespace vauth::crypto
