#include "storage/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <set>

#include <json.hpp>

#include "crypto/credential_wrapper.hpp"
#include "crypto/primitives.hpp"

namespace vauth::storage {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::mutex g_open_mu;
std::set<std::string> g_open_paths;

[[noreturn]] void format_error(const std::string& what)
{
    throw StorageError(StorageErrorKind::format, "store document: " + what);
}

Bytes hex_field(const json& j, const char* key, std::size_t expected = 0)
{
    if (!j.contains(key) || !j.at(key).is_string())
        format_error(std::string("missing or non-string field '") + key + "'");
    Bytes b;
    try {
        b = from_hex(j.at(key).get<std::string>());
    } catch (const std::invalid_argument&) {
        format_error(std::string("field '") + key + "' is not hex");
    }
    if (expected && b.size() != expected)
        format_error(std::string("field '") + key + "' has the wrong length");
    return b;
}

void write_atomic(const fs::path& path, ByteView data)
{
    fs::path tmp = path;
    tmp += ".tmp";
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
    if (fd < 0)
        throw StorageError(StorageErrorKind::io, "cannot write " + tmp.string() + ": " + std::strerror(errno));
    std::size_t done = 0;
    while (done < data.size()) {
        ssize_t n = ::write(fd, data.data() + done, data.size() - done);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            int err = errno;
            ::close(fd);
            ::unlink(tmp.c_str());
            throw StorageError(StorageErrorKind::io, "write to " + tmp.string() + " failed: " + std::strerror(err));
        }
        done += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0 || ::close(fd) != 0) {
        ::unlink(tmp.c_str());
        throw StorageError(StorageErrorKind::io, "cannot flush " + tmp.string());
    }
    if (::rename(tmp.c_str(), path.c_str()) != 0) {
        int err = errno;
        ::unlink(tmp.c_str());
        throw StorageError(StorageErrorKind::io, "cannot replace " + path.string() + ": " + std::strerror(err));
    }
}

Bytes read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw StorageError(StorageErrorKind::io, "cannot read " + path.string());
    return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

bool looks_like_json_document(ByteView raw)
{
    return json::accept(raw.begin(), raw.end());
}

} // namespace

std::string document_to_json(const StoreDocument& doc)
{
    json j;
    j["schema_version"] = kSchemaVersion;
    j["signature_counter"] = doc.signature_counter;
    j["wrap_key"] = to_hex(doc.wrap_key);
    if (doc.pin)
        j["client_pin"] = {{"pin_hash", to_hex(doc.pin->pin_hash)}, {"retries", doc.pin->retries}};
    else
        j["client_pin"] = nullptr;
    json creds = json::object();
    for (const auto& [rp, list] : doc.credentials) {
        json arr = json::array();
        for (const auto& c : list)
            arr.push_back({{"id", to_hex(c.id)}, {"source", to_hex(c.source)}});
        creds[rp] = std::move(arr);
    }
    j["credentials"] = std::move(creds);
    return j.dump(2);
}

StoreDocument document_from_json(std::string_view text)
{
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        format_error("not a JSON object");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        format_error("missing schema_version");
    if (j["schema_version"].get<int>() != kSchemaVersion)
        format_error("unsupported schema_version " + j["schema_version"].dump());

    StoreDocument doc;
    if (!j.contains("signature_counter") || !j["signature_counter"].is_number_unsigned())
        format_error("missing or negative signature_counter");
    doc.signature_counter = j["signature_counter"].get<std::uint64_t>();
    doc.wrap_key = hex_field(j, "wrap_key", crypto::kWrapKeySize);

    if (!j.contains("client_pin"))
        format_error("missing client_pin");
    const json& pin = j["client_pin"];
    if (!pin.is_null()) {
        if (!pin.is_object() || !pin.contains("retries") || !pin["retries"].is_number_integer())
            format_error("malformed client_pin");
        PinRecord rec;
        rec.pin_hash = hex_field(pin, "pin_hash", 16);
        rec.retries = pin["retries"].get<int>();
        if (rec.retries < 0 || rec.retries > 8)
            format_error("client_pin retries out of range");
        doc.pin = rec;
    }

    if (!j.contains("credentials") || !j["credentials"].is_object())
        format_error("missing credentials");
    for (const auto& [rp, list] : j["credentials"].items()) {
        if (!list.is_array())
            format_error("credentials for '" + rp + "' is not an array");
        auto& out = doc.credentials[rp];
        for (const auto& entry : list) {
            if (!entry.is_object())
                format_error("credential entry is not an object");
            StoredCredential c{hex_field(entry, "id"), hex_field(entry, "source")};
            if (c.id.empty())
                format_error("credential entry with empty id");
            out.push_back(std::move(c));
        }
    }
    return doc;
}

StoreDocument fresh_document()
{
    StoreDocument doc;
    doc.wrap_key = crypto::AesCredentialWrapper{}.generate_key();
    return doc;
}

Store::Store(StoreOptions options, StoreDocument doc, Bytes salt, Bytes key)
    : options_(std::move(options)), doc_(std::move(doc)), salt_(std::move(salt)), key_(std::move(key))
{
}

std::unique_ptr<Store> Store::open_or_init(const StoreOptions& options)
{
    if (options.path.empty())
        throw StorageError(StorageErrorKind::argument, "store path is empty");
    if (options.backend == Backend::encrypted && options.password.empty())
        throw StorageError(StorageErrorKind::argument, "encrypted store requires a password");

    std::error_code ec;
    fs::path canonical = fs::weakly_canonical(options.path, ec);
    std::string key = ec ? fs::absolute(options.path).string() : canonical.string();
    {
        std::lock_guard lock(g_open_mu);
        if (!g_open_paths.insert(key).second)
            throw StorageError(StorageErrorKind::already_open, "store " + key + " is already open in this process");
    }

    try {
        std::unique_ptr<Store> store;
        if (!fs::exists(options.path)) {
            Bytes salt, derived;
            if (options.backend == Backend::encrypted) {
                salt = crypto::random_bytes(kSaltSize);
                derived = derive_storage_key(options.password, salt, options.kdf_iterations);
            }
            store.reset(new Store(options, fresh_document(), std::move(salt), std::move(derived)));
            if (options.path.has_parent_path())
                fs::create_directories(options.path.parent_path(), ec);
            store->write_file(store->doc_);
        } else {
            Bytes raw = read_file(options.path);
            if (options.backend == Backend::plaintext) {
                store.reset(new Store(options, document_from_json(to_string(raw)), {}, {}));
            } else {
                if (looks_like_json_document(raw))
                    throw StorageError(StorageErrorKind::format, "store file is plaintext, not encrypted");
                try {
                    Bytes salt = envelope_salt(raw);
                    Bytes derived = derive_storage_key(options.password, salt, options.kdf_iterations);
                    Bytes text = open_envelope(derived, raw);
                    store.reset(new Store(options, document_from_json(to_string(text)), std::move(salt),
                                          std::move(derived)));
                } catch (const EnvelopeError& e) {
                    throw StorageError(e.kind() == EnvelopeErrorKind::authentication
                                           ? StorageErrorKind::authentication
                                           : StorageErrorKind::format,
                                       e.what());
                }
            }
        }
        store->registry_key_ = key;
        return store;
    } catch (...) {
        std::lock_guard lock(g_open_mu);
        g_open_paths.erase(key);
        throw;
    }
}

Store::~Store()
{
    crypto::cleanse(key_);
    if (!registry_key_.empty()) {
        std::lock_guard lock(g_open_mu);
        g_open_paths.erase(registry_key_);
    }
}

void Store::write_file(const StoreDocument& doc) const
{
    std::string text = document_to_json(doc);
    if (options_.backend == Backend::plaintext)
        write_atomic(options_.path, to_bytes(text));
    else
        write_atomic(options_.path, seal_envelope(key_, salt_, to_bytes(text)));
}

void Store::commit(StoreDocument next)
{
    write_file(next);
    doc_ = std::move(next);
}

void Store::add_credential_source(const std::string& rp_id, StoredCredential cred)
{
    StoreDocument next = doc_;
    next.credentials[rp_id].push_back(std::move(cred));
    commit(std::move(next));
}

std::vector<StoredCredential> Store::get_credential_source_by_rp(const std::string& rp_id,
                                                                 const std::vector<Bytes>* allow_list) const
{
    std::vector<StoredCredential> out;
    auto it = doc_.credentials.find(rp_id);
    if (it == doc_.credentials.end())
        return out;
    for (auto c = it->second.rbegin(); c != it->second.rend(); ++c) {
        if (allow_list && std::find(allow_list->begin(), allow_list->end(), c->id) == allow_list->end())
            continue;
        out.push_back(*c);
    }
    return out;
}

std::uint64_t Store::increment_counter()
{
    StoreDocument next = doc_;
    ++next.signature_counter;
    commit(std::move(next));
    return doc_.signature_counter;
}

void Store::set_wrap_key(Bytes key)
{
    if (key.size() != crypto::kWrapKeySize)
        throw StorageError(StorageErrorKind::argument, "wrap key must be 32 bytes");
    StoreDocument next = doc_;
    next.wrap_key = std::move(key);
    commit(std::move(next));
}

void Store::set_pin_record(std::optional<PinRecord> pin)
{
    StoreDocument next = doc_;
    next.pin = std::move(pin);
    commit(std::move(next));
}

void Store::reset_document()
{
    commit(fresh_document());
}

bool Store::check_password(std::string_view password) const
{
    if (options_.backend != Backend::encrypted || password.empty())
        return false;
    return crypto::constant_time_equal(derive_storage_key(password, salt_, options_.kdf_iterations), key_);
}

} // namespace vauth::storage
