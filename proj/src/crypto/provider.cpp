#include "crypto/provider.hpp"

namespace vauth::crypto {

void ProviderRegistry::add(std::shared_ptr<CryptoProvider> provider)
{
    std::int64_t alg = provider->algorithm();
    if (providers_.contains(alg))
        throw CryptoError("a provider for COSE algorithm " + std::to_string(alg) + " is already registered");
    providers_.emplace(alg, std::move(provider));
    order_.push_back(alg);
}

CryptoProvider* ProviderRegistry::find(std::int64_t alg) const
{
    auto it = providers_.find(alg);
    return it == providers_.end() ? nullptr : it->second.get();
}

CryptoProvider& ProviderRegistry::require(std::int64_t alg) const
{
    if (auto* p = find(alg))
        return *p;
    throw UnsupportedAlgorithm(alg);
}

} // namespace vauth::crypto
