#include "openssl_oracle.hpp"

#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

namespace oracle {

namespace {

const EVP_CIPHER* cipher_for(std::size_t kek_len)
{
    switch (kek_len) {
    case 16: return EVP_aes_128_wrap_pad();
    case 24: return EVP_aes_192_wrap_pad();
    case 32: return EVP_aes_256_wrap_pad();
    default: throw std::invalid_argument("kek size");
    }
}

std::optional<std::vector<std::uint8_t>> run(bool enc, const std::vector<std::uint8_t>& kek,
                                             const std::vector<std::uint8_t>& in)
{
    std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
    EVP_CIPHER_CTX_set_flags(ctx.get(), EVP_CIPHER_CTX_FLAG_WRAP_ALLOW);
    if (EVP_CipherInit_ex(ctx.get(), cipher_for(kek.size()), nullptr, kek.data(), nullptr, enc ? 1 : 0) != 1)
        return std::nullopt;
    std::vector<std::uint8_t> out(in.size() + 16);
    int len = 0, fin = 0;
    if (EVP_CipherUpdate(ctx.get(), out.data(), &len, in.data(), static_cast<int>(in.size())) != 1 || len < 0)
        return std::nullopt;
    if (EVP_CipherFinal_ex(ctx.get(), out.data() + len, &fin) != 1)
        return std::nullopt;
    out.resize(static_cast<std::size_t>(len + fin));
    return out;
}

} // namespace

std::vector<std::uint8_t> openssl_wrap_pad(const std::vector<std::uint8_t>& kek, const std::vector<std::uint8_t>& pt)
{
    auto r = run(true, kek, pt);
    if (!r)
        throw std::runtime_error("openssl wrap failed");
    return *r;
}

std::optional<std::vector<std::uint8_t>> openssl_unwrap_pad(const std::vector<std::uint8_t>& kek,
                                                            const std::vector<std::uint8_t>& ct)
{
    return run(false, kek, ct);
}

} // namespace oracle
