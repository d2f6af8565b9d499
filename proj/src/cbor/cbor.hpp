#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "common/bytes.hpp"

namespace vauth::cbor {

class Value;

using Array = std::vector<Value>;
using Map = std::vector<std::pair<Value, Value>>;

struct Null {
    bool operator==(const Null&) const = default;
};

/// Subset of CBOR used by CTAP2: integers within int64, byte and text
/// strings, arrays, maps, booleans and null. Floats and tags are rejected.
class Value {
public:
    using Storage = std::variant<std::int64_t, Bytes, std::string, Array, Map, bool, Null>;

    Value() : v_(Null{}) {}
    Value(std::int64_t i) : v_(i) {}
    Value(int i) : v_(std::int64_t{i}) {}
    Value(std::uint32_t i) : v_(std::int64_t{i}) {}
    Value(Bytes b) : v_(std::move(b)) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(const char* s) : v_(std::string(s)) {}
    Value(Array a) : v_(std::move(a)) {}
    Value(Map m) : v_(std::move(m)) {}
    Value(bool b) : v_(b) {}
    Value(Null n) : v_(n) {}

    bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
    bool is_bytes() const { return std::holds_alternative<Bytes>(v_); }
    bool is_text() const { return std::holds_alternative<std::string>(v_); }
    bool is_array() const { return std::holds_alternative<Array>(v_); }
    bool is_map() const { return std::holds_alternative<Map>(v_); }
    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_null() const { return std::holds_alternative<Null>(v_); }

    std::int64_t as_int() const { return get<std::int64_t>(); }
    const Bytes& as_bytes() const { return get<Bytes>(); }
    const std::string& as_text() const { return get<std::string>(); }
    const Array& as_array() const { return get<Array>(); }
    const Map& as_map() const { return get<Map>(); }
    bool as_bool() const { return get<bool>(); }

    /// Map lookup; nullptr when absent or when this is not a map.
    const Value* find(const Value& key) const;

    const Storage& storage() const { return v_; }

    bool operator==(const Value& other) const = default;

private:
    template <typename T>
    const T& get() const;

    Storage v_;
};

enum class DecodeErrorKind { malformed, unsupported, too_deep, trailing_data };

class DecodeError : public std::runtime_error {
public:
    DecodeError(DecodeErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    DecodeErrorKind kind() const noexcept { return kind_; }

private:
    DecodeErrorKind kind_;
};

class TypeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Canonical encoding: shortest-form heads, definite lengths, map entries
/// sorted by (encoded key length, encoded key bytes).
Bytes encode(const Value& v);

/// Decodes exactly one item spanning all of `data`.
Value decode(ByteView data);

/// Decodes one item from the front of `data`, returning bytes consumed.
std::pair<Value, std::size_t> decode_prefix(ByteView data);

} // namespace vauth::cbor
