#include "crypto/primitives.hpp"

#include <mutex>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

namespace vauth::crypto {

namespace {

struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

CipherCtx new_ctx()
{
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx)
        throw CryptoError("EVP_CIPHER_CTX_new failed");
    return ctx;
}

Bytes run_cipher(const EVP_CIPHER* cipher, bool encrypt, bool padding, ByteView key, ByteView iv,
                 ByteView input)
{
    auto ctx = new_ctx();
    if (EVP_CipherInit_ex(ctx.get(), cipher, nullptr, key.data(), iv.data(), encrypt ? 1 : 0) != 1)
        throw CryptoError("cipher init failed");
    EVP_CIPHER_CTX_set_padding(ctx.get(), padding ? 1 : 0);
    Bytes out(input.size() + 16);
    int len1 = 0;
    if (EVP_CipherUpdate(ctx.get(), out.data(), &len1, input.data(), static_cast<int>(input.size())) != 1)
        throw CryptoError("cipher update failed");
    int len2 = 0;
    if (EVP_CipherFinal_ex(ctx.get(), out.data() + len1, &len2) != 1)
        throw CryptoError(padding ? "bad padding" : "input is not a whole number of blocks");
    out.resize(static_cast<std::size_t>(len1 + len2));
    return out;
}

void require(bool ok, const char* what)
{
    if (!ok)
        throw CryptoError(what);
}

} // namespace

Digest sha256(ByteView data)
{
    Digest d;
    SHA256(data.data(), data.size(), d.data());
    return d;
}

Bytes sha256_bytes(ByteView data)
{
    auto d = sha256(data);
    return Bytes(d.begin(), d.end());
}

Bytes hmac_sha256(ByteView key, ByteView data)
{
    Bytes out(32);
    unsigned int len = 0;
    static const std::uint8_t empty = 0;
    require(HMAC(EVP_sha256(), key.empty() ? &empty : key.data(), static_cast<int>(key.size()),
                 data.data(), data.size(), out.data(), &len) != nullptr,
            "HMAC failed");
    out.resize(len);
    return out;
}

namespace {

struct SeededStream {
    Bytes key;
    std::uint64_t counter = 0;
};

std::mutex g_seeded_mu;
std::optional<SeededStream> g_seeded;

} // namespace

DeterministicRandomScope::DeterministicRandomScope(ByteView seed)
{
    std::lock_guard lock(g_seeded_mu);
    if (g_seeded)
        throw CryptoError("deterministic random scopes do not nest");
    g_seeded = SeededStream{sha256_bytes(seed), 0};
}

DeterministicRandomScope::~DeterministicRandomScope()
{
    std::lock_guard lock(g_seeded_mu);
    g_seeded.reset();
}

bool deterministic_random_active()
{
    std::lock_guard lock(g_seeded_mu);
    return g_seeded.has_value();
}

Bytes random_bytes(std::size_t n)
{
    Bytes out(n);
    {
        std::lock_guard lock(g_seeded_mu);
        if (g_seeded) {
            out.clear();
            while (out.size() < n) {
                Bytes ctr;
                put_u64_be(ctr, g_seeded->counter++);
                append(out, hmac_sha256(g_seeded->key, ctr));
            }
            out.resize(n);
            return out;
        }
    }
    if (n > 0)
        require(RAND_bytes(out.data(), static_cast<int>(n)) == 1, "RAND_bytes failed");
    return out;
}

bool constant_time_equal(ByteView a, ByteView b)
{
    if (a.size() != b.size())
        return false;
    if (a.empty())
        return true;
    return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

void cleanse(Bytes& b)
{
    if (!b.empty())
        OPENSSL_cleanse(b.data(), b.size());
}

Bytes aes256_cbc_encrypt(ByteView key, ByteView iv, ByteView plaintext)
{
    require(key.size() == 32 && iv.size() == 16, "AES-256-CBC needs 32-byte key and 16-byte IV");
    return run_cipher(EVP_aes_256_cbc(), true, false, key, iv, plaintext);
}

Bytes aes256_cbc_decrypt(ByteView key, ByteView iv, ByteView ciphertext)
{
    require(key.size() == 32 && iv.size() == 16, "AES-256-CBC needs 32-byte key and 16-byte IV");
    return run_cipher(EVP_aes_256_cbc(), false, false, key, iv, ciphertext);
}

Bytes aes128_cbc_pkcs7_encrypt(ByteView key, ByteView iv, ByteView plaintext)
{
    require(key.size() == 16 && iv.size() == 16, "AES-128-CBC needs 16-byte key and IV");
    return run_cipher(EVP_aes_128_cbc(), true, true, key, iv, plaintext);
}

Bytes aes128_cbc_pkcs7_decrypt(ByteView key, ByteView iv, ByteView ciphertext)
{
    require(key.size() == 16 && iv.size() == 16, "AES-128-CBC needs 16-byte key and IV");
    return run_cipher(EVP_aes_128_cbc(), false, true, key, iv, ciphertext);
}

Bytes aes256_gcm_seal(ByteView key, ByteView nonce, ByteView aad, ByteView plaintext)
{
    require(key.size() == 32 && nonce.size() == 12, "AES-256-GCM needs 32-byte key and 12-byte nonce");
    auto ctx = new_ctx();
    int len = 0;
    require(EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) == 1,
            "GCM init failed");
    if (!aad.empty())
        require(EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) == 1,
                "GCM aad failed");
    Bytes out(plaintext.size() + 16);
    int n = 0;
    require(EVP_EncryptUpdate(ctx.get(), out.data(), &n, plaintext.data(),
                              static_cast<int>(plaintext.size())) == 1,
            "GCM update failed");
    require(EVP_EncryptFinal_ex(ctx.get(), out.data() + n, &len) == 1, "GCM final failed");
    require(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, 16, out.data() + plaintext.size()) == 1,
            "GCM tag failed");
    return out;
}

std::optional<Bytes> aes256_gcm_open(ByteView key, ByteView nonce, ByteView aad, ByteView sealed)
{
    require(key.size() == 32 && nonce.size() == 12, "AES-256-GCM needs 32-byte key and 12-byte nonce");
    if (sealed.size() < 16)
        return std::nullopt;
    std::size_t ct_len = sealed.size() - 16;
    auto ctx = new_ctx();
    int len = 0;
    require(EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) == 1,
            "GCM init failed");
    if (!aad.empty())
        require(EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) == 1,
                "GCM aad failed");
    Bytes out(ct_len + 16);
    int n = 0;
    require(EVP_DecryptUpdate(ctx.get(), out.data(), &n, sealed.data(), static_cast<int>(ct_len)) == 1,
            "GCM update failed");
    Bytes tag(sealed.begin() + static_cast<std::ptrdiff_t>(ct_len), sealed.end());
    require(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, 16, tag.data()) == 1, "GCM tag failed");
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + n, &len) != 1) {
        cleanse(out);
        return std::nullopt;
    }
    out.resize(ct_len);
    return out;
}

Bytes pbkdf2_sha256(std::string_view password, ByteView salt, unsigned iterations, std::size_t out_len)
{
    Bytes out(out_len);
    require(PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()), salt.data(),
                              static_cast<int>(salt.size()), static_cast<int>(iterations), EVP_sha256(),
                              static_cast<int>(out_len), out.data()) == 1,
            "PBKDF2 failed");
    return out;
}

AesBlockCipher::AesBlockCipher(ByteView key)
{
    const EVP_CIPHER* cipher = nullptr;
    switch (key.size()) {
    case 16: cipher = EVP_aes_128_ecb(); break;
    case 24: cipher = EVP_aes_192_ecb(); break;
    case 32: cipher = EVP_aes_256_ecb(); break;
    default: throw CryptoError("AES key must be 16, 24 or 32 bytes");
    }
    auto enc = new_ctx();
    auto dec = new_ctx();
    require(EVP_EncryptInit_ex(enc.get(), cipher, nullptr, key.data(), nullptr) == 1, "AES init failed");
    require(EVP_DecryptInit_ex(dec.get(), cipher, nullptr, key.data(), nullptr) == 1, "AES init failed");
    EVP_CIPHER_CTX_set_padding(enc.get(), 0);
    EVP_CIPHER_CTX_set_padding(dec.get(), 0);
    enc_ = enc.release();
    dec_ = dec.release();
}

AesBlockCipher::~AesBlockCipher()
{
    EVP_CIPHER_CTX_free(enc_);
    EVP_CIPHER_CTX_free(dec_);
}

void AesBlockCipher::encrypt(std::uint8_t block[16]) const
{
    int len = 0;
    require(EVP_EncryptUpdate(enc_, block, &len, block, 16) == 1 && len == 16, "AES block encrypt failed");
}

void AesBlockCipher::decrypt(std::uint8_t block[16]) const
{
    int len = 0;
    require(EVP_DecryptUpdate(dec_, block, &len, block, 16) == 1 && len == 16, "AES block decrypt failed");
}

} // namespace vauth::crypto
