#pragma once

// Key wrap with padding straight from OpenSSL's EVP_aes_256_wrap_pad.

#include <cstdint>
#include <optional>
#include <vector>

namespace oracle {

std::vector<std::uint8_t> openssl_wrap_pad(const std::vector<std::uint8_t>& kek, const std::vector<std::uint8_t>& pt);
std::optional<std::vector<std::uint8_t>> openssl_unwrap_pad(const std::vector<std::uint8_t>& kek,
                                                            const std::vector<std::uint8_t>& ct);

} // namespace oracle
