#include "cbor/cbor.hpp"

#include <algorithm>

namespace vauth::cbor {

template <typename T>
const T& Value::get() const
{
    if (const T* p = std::get_if<T>(&v_))
        return *p;
    throw TypeError("CBOR value has unexpected type");
}

template const std::int64_t& Value::get<std::int64_t>() const;
template const Bytes& Value::get<Bytes>() const;
template const std::string& Value::get<std::string>() const;
template const Array& Value::get<Array>() const;
template const Map& Value::get<Map>() const;
template const bool& Value::get<bool>() const;

const Value* Value::find(const Value& key) const
{
    const Map* m = std::get_if<Map>(&v_);
    if (!m)
        return nullptr;
    for (const auto& [k, v] : *m)
        if (k == key)
            return &v;
    return nullptr;
}

namespace {

enum MajorType : std::uint8_t {
    kUnsigned = 0,
    kNegative = 1,
    kByteString = 2,
    kTextString = 3,
    kArray = 4,
    kMap = 5,
    kTag = 6,
    kSimple = 7,
};

void put_head(Bytes& out, std::uint8_t major, std::uint64_t arg)
{
    std::uint8_t mt = static_cast<std::uint8_t>(major << 5);
    if (arg < 24) {
        out.push_back(static_cast<std::uint8_t>(mt | arg));
    } else if (arg <= 0xFF) {
        out.push_back(mt | 24);
        out.push_back(static_cast<std::uint8_t>(arg));
    } else if (arg <= 0xFFFF) {
        out.push_back(mt | 25);
        put_u16_be(out, static_cast<std::uint16_t>(arg));
    } else if (arg <= 0xFFFFFFFFull) {
        out.push_back(mt | 26);
        put_u32_be(out, static_cast<std::uint32_t>(arg));
    } else {
        out.push_back(mt | 27);
        put_u64_be(out, arg);
    }
}

void encode_into(Bytes& out, const Value& v)
{
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::int64_t>) {
                if (x >= 0)
                    put_head(out, kUnsigned, static_cast<std::uint64_t>(x));
                else
                    put_head(out, kNegative, static_cast<std::uint64_t>(-(x + 1)));
            } else if constexpr (std::is_same_v<T, Bytes>) {
                put_head(out, kByteString, x.size());
                append(out, x);
            } else if constexpr (std::is_same_v<T, std::string>) {
                put_head(out, kTextString, x.size());
                out.insert(out.end(), x.begin(), x.end());
            } else if constexpr (std::is_same_v<T, Array>) {
                put_head(out, kArray, x.size());
                for (const auto& item : x)
                    encode_into(out, item);
            } else if constexpr (std::is_same_v<T, Map>) {
                std::vector<std::pair<Bytes, const Value*>> entries;
                entries.reserve(x.size());
                for (const auto& [k, val] : x)
                    entries.emplace_back(encode(k), &val);
                std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
                    if (a.first.size() != b.first.size())
                        return a.first.size() < b.first.size();
                    return a.first < b.first;
                });
                put_head(out, kMap, entries.size());
                for (const auto& [key_bytes, val] : entries) {
                    append(out, key_bytes);
                    encode_into(out, *val);
                }
            } else if constexpr (std::is_same_v<T, bool>) {
                out.push_back(x ? 0xF5 : 0xF4);
            } else {
                out.push_back(0xF6);
            }
        },
        v.storage());
}

constexpr int kMaxDepth = 32;

class Reader {
public:
    explicit Reader(ByteView data) : data_(data) {}

    std::size_t offset() const { return pos_; }

    Value read(int depth)
    {
        if (depth > kMaxDepth)
            throw DecodeError(DecodeErrorKind::too_deep, "CBOR nesting too deep");
        std::uint8_t initial = byte();
        std::uint8_t major = initial >> 5;
        std::uint8_t info = initial & 0x1F;

        if (major == kSimple) {
            switch (info) {
            case 20: return Value(false);
            case 21: return Value(true);
            case 22: return Value(Null{});
            default:
                throw DecodeError(DecodeErrorKind::unsupported, "unsupported CBOR simple/float value");
            }
        }
        if (major == kTag)
            throw DecodeError(DecodeErrorKind::unsupported, "CBOR tags are not supported");
        if (info == 31)
            throw DecodeError(DecodeErrorKind::unsupported, "indefinite-length CBOR is not supported");

        std::uint64_t arg = argument(info);
        switch (major) {
        case kUnsigned:
            if (arg > static_cast<std::uint64_t>(INT64_MAX))
                throw DecodeError(DecodeErrorKind::unsupported, "integer out of range");
            return Value(static_cast<std::int64_t>(arg));
        case kNegative:
            if (arg > static_cast<std::uint64_t>(INT64_MAX))
                throw DecodeError(DecodeErrorKind::unsupported, "integer out of range");
            return Value(-1 - static_cast<std::int64_t>(arg));
        case kByteString: {
            auto span = take(arg);
            return Value(Bytes(span.begin(), span.end()));
        }
        case kTextString: {
            auto span = take(arg);
            return Value(std::string(span.begin(), span.end()));
        }
        case kArray: {
            ensure_items(arg);
            Array items;
            items.reserve(static_cast<std::size_t>(arg));
            for (std::uint64_t i = 0; i < arg; ++i)
                items.push_back(read(depth + 1));
            return Value(std::move(items));
        }
        case kMap: {
            ensure_items(arg * 2);
            Map entries;
            entries.reserve(static_cast<std::size_t>(arg));
            for (std::uint64_t i = 0; i < arg; ++i) {
                Value key = read(depth + 1);
                for (const auto& existing : entries)
                    if (existing.first == key)
                        throw DecodeError(DecodeErrorKind::malformed, "duplicate CBOR map key");
                Value val = read(depth + 1);
                entries.emplace_back(std::move(key), std::move(val));
            }
            return Value(std::move(entries));
        }
        default:
            throw DecodeError(DecodeErrorKind::malformed, "bad CBOR major type");
        }
    }

private:
    std::uint8_t byte()
    {
        if (pos_ >= data_.size())
            throw DecodeError(DecodeErrorKind::malformed, "truncated CBOR");
        return data_[pos_++];
    }

    ByteView take(std::uint64_t n)
    {
        if (n > data_.size() - pos_)
            throw DecodeError(DecodeErrorKind::malformed, "truncated CBOR string");
        auto out = data_.subspan(pos_, static_cast<std::size_t>(n));
        pos_ += static_cast<std::size_t>(n);
        return out;
    }

    // Every item needs at least one byte, so counts beyond the remaining
    // input are malformed and must not drive allocation.
    void ensure_items(std::uint64_t n)
    {
        if (n > data_.size() - pos_)
            throw DecodeError(DecodeErrorKind::malformed, "truncated CBOR container");
    }

    std::uint64_t argument(std::uint8_t info)
    {
        if (info < 24)
            return info;
        int len = 0;
        switch (info) {
        case 24: len = 1; break;
        case 25: len = 2; break;
        case 26: len = 4; break;
        case 27: len = 8; break;
        default: throw DecodeError(DecodeErrorKind::malformed, "reserved CBOR additional info");
        }
        std::uint64_t v = 0;
        for (int i = 0; i < len; ++i)
            v = (v << 8) | byte();
        return v;
    }

    ByteView data_;
    std::size_t pos_ = 0;
};

} // namespace

Bytes encode(const Value& v)
{
    Bytes out;
    encode_into(out, v);
    return out;
}

std::pair<Value, std::size_t> decode_prefix(ByteView data)
{
    Reader r(data);
    Value v = r.read(0);
    return {std::move(v), r.offset()};
}

Value decode(ByteView data)
{
    auto [v, used] = decode_prefix(data);
    if (used != data.size())
        throw DecodeError(DecodeErrorKind::trailing_data, "trailing bytes after CBOR item");
    return v;
}

} // namespace vauth::cbor
