#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace quotecast::resp {

// RESP2 value tree. SimpleString/Error text must not contain CR or LF;
// encode_value enforces this.
struct RespValue;

struct SimpleString {
    std::string text;
    bool operator==(const SimpleString&) const = default;
};

struct Error {
    std::string text;
    bool operator==(const Error&) const = default;
};

struct BulkString {
    std::string bytes;
    bool operator==(const BulkString&) const = default;
};

struct Null {
    bool operator==(const Null&) const = default;
};

struct RespValue {
    using Array = std::vector<RespValue>;
    std::variant<SimpleString, Error, std::int64_t, BulkString, Array, Null> node;

    bool operator==(const RespValue&) const = default;

    bool is_array() const { return std::holds_alternative<Array>(node); }
    bool is_error() const { return std::holds_alternative<Error>(node); }
    bool is_null() const { return std::holds_alternative<Null>(node); }

    static RespValue simple(std::string s) { return {SimpleString{std::move(s)}}; }
    static RespValue error(std::string s) { return {Error{std::move(s)}}; }
    static RespValue integer(std::int64_t v) { return {v}; }
    static RespValue bulk(std::string s) { return {BulkString{std::move(s)}}; }
    static RespValue array(Array a) { return {std::move(a)}; }
    static RespValue null() { return {Null{}}; }
};

struct DecodeLimits {
    std::size_t max_depth = 32;
    std::size_t max_array_elements = 1'048'576;
    std::size_t max_bulk_bytes = 1'048'576;
};

// Result of one incremental decode attempt over a byte buffer.
struct DecodeProgress {
    enum class State { Complete, NeedMoreBytes, ProtocolError };

    State state = State::NeedMoreBytes;
    RespValue value;          // valid when Complete
    std::size_t consumed = 0; // bytes of the buffer used, when Complete
    std::string error;        // description, when ProtocolError

    bool complete() const { return state == State::Complete; }
    bool need_more() const { return state == State::NeedMoreBytes; }
    bool failed() const { return state == State::ProtocolError; }
};

// Encodes one value in RESP2 framing, byte-exact. Throws std::invalid_argument
// if a simple string or error contains CR/LF.
std::string encode_value(const RespValue& v);

// Encodes a client command as an array of bulk strings. parts must be non-empty.
std::string encode_command(const std::vector<std::string>& parts);

// Decodes exactly one top-level value from the front of buffer. Never consumes
// bytes past that value; NeedMoreBytes iff the buffer is a strict prefix of
// some valid encoding.
DecodeProgress decode(std::string_view buffer, const DecodeLimits& limits = {});

}  // namespace quotecast::resp
