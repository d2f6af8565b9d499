#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "common/bytes.hpp"
#include "storage/envelope.hpp"

namespace vauth::storage {

constexpr int kSchemaVersion = 1;

struct PinRecord {
    Bytes pin_hash; // left 16 bytes of SHA-256(PIN)
    int retries = 8;

    bool operator==(const PinRecord&) const = default;
};

struct StoredCredential {
    Bytes id;
    Bytes source; // serialized credential source

    bool operator==(const StoredCredential&) const = default;
};

struct StoreDocument {
    std::uint64_t signature_counter = 0;
    Bytes wrap_key;
    std::optional<PinRecord> pin;
    std::map<std::string, std::vector<StoredCredential>> credentials; // creation order per RP

    bool operator==(const StoreDocument&) const = default;
};

std::string document_to_json(const StoreDocument& doc);
/// Throws StorageError(format) on any schema violation.
StoreDocument document_from_json(std::string_view text);

enum class Backend { plaintext, encrypted };

enum class StorageErrorKind { io, format, authentication, already_open, argument };

class StorageError : public std::runtime_error {
public:
    StorageError(StorageErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    StorageErrorKind kind() const noexcept { return kind_; }

private:
    StorageErrorKind kind_;
};

struct StoreOptions {
    std::filesystem::path path;
    Backend backend = Backend::plaintext;
    std::string password; // encrypted backend only
    unsigned kdf_iterations = kDefaultKdfIterations;
};

/// Write-through store: every mutation is persisted (tmp file + rename)
/// before the call returns, and memory only changes once the write
/// succeeded. One handle per file per process.
class Store {
public:
    static std::unique_ptr<Store> open_or_init(const StoreOptions& options);
    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    const StoreDocument& document() const { return doc_; }
    Backend backend() const { return options_.backend; }
    const std::filesystem::path& path() const { return options_.path; }

    void add_credential_source(const std::string& rp_id, StoredCredential cred);
    /// Most recent first, filtered to `allow_list` ids when given.
    std::vector<StoredCredential> get_credential_source_by_rp(const std::string& rp_id,
                                                              const std::vector<Bytes>* allow_list = nullptr) const;

    std::uint64_t counter() const { return doc_.signature_counter; }
    std::uint64_t increment_counter();

    const Bytes& wrap_key() const { return doc_.wrap_key; }
    void set_wrap_key(Bytes key);

    std::optional<PinRecord> pin_record() const { return doc_.pin; }
    void set_pin_record(std::optional<PinRecord> pin);

    /// Clears credentials and PIN, zeroes the counter and installs a fresh wrap key.
    void reset_document();

    /// Compares against the storage password. Always false for plaintext stores.
    bool check_password(std::string_view password) const;

private:
    Store(StoreOptions options, StoreDocument doc, Bytes salt, Bytes key);
    void commit(StoreDocument next);
    void write_file(const StoreDocument& doc) const;

    StoreOptions options_;
    std::string registry_key_;
    StoreDocument doc_;
    Bytes salt_;
    Bytes key_;
};

StoreDocument fresh_document();

} // namespace vauth::storage
