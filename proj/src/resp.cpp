#include "quotecast/resp.hpp"

#include <charconv>
#include <stdexcept>

namespace quotecast::resp {

namespace {

constexpr std::string_view kCrlf = "\r\n";

void check_line_safe(const std::string& s) {
    if (s.find('\r') != std::string::npos || s.find('\n') != std::string::npos) {
        throw std::invalid_argument("simple string / error may not contain CR or LF");
    }
}

void encode_into(const RespValue& v, std::string& out) {
    struct Visitor {
        std::string& out;
        void operator()(const SimpleString& s) const {
            check_line_safe(s.text);
            out += '+';
            out += s.text;
            out += kCrlf;
        }
        void operator()(const Error& e) const {
            check_line_safe(e.text);
            out += '-';
            out += e.text;
            out += kCrlf;
        }
        void operator()(std::int64_t n) const {
            out += ':';
            out += std::to_string(n);
            out += kCrlf;
        }
        void operator()(const BulkString& b) const {
            out += '$';
            out += std::to_string(b.bytes.size());
            out += kCrlf;
            out += b.bytes;
            out += kCrlf;
        }
        void operator()(const RespValue::Array& a) const {
            out += '*';
            out += std::to_string(a.size());
            out += kCrlf;
            for (const RespValue& e : a) encode_into(e, out);
        }
        void operator()(const Null&) const { out += "$-1\r\n"; }
    };
    std::visit(Visitor{out}, v.node);
}

struct Cursor {
    std::string_view buf;
    std::size_t pos = 0;

    std::size_t remaining() const { return buf.size() - pos; }
};

DecodeProgress need_more() { return DecodeProgress{DecodeProgress::State::NeedMoreBytes, {}, 0, {}}; }

DecodeProgress protocol_error(std::string msg) {
    return DecodeProgress{DecodeProgress::State::ProtocolError, {}, 0, std::move(msg)};
}

// Reads up to CRLF. Returns the line body in `line`; distinguishes "line not
// complete yet" from "line contains a bare CR/LF" via the progress result.
enum class LineStatus { Ok, NeedMore, BadFraming };

LineStatus read_line(Cursor& cur, std::string_view& line) {
    std::size_t eol = cur.buf.find('\r', cur.pos);
    // A bare LF before any CR cannot extend to a valid line.
    std::size_t lf = cur.buf.find('\n', cur.pos);
    if (lf != std::string_view::npos && (eol == std::string_view::npos || lf < eol)) {
        return LineStatus::BadFraming;
    }
    if (eol == std::string_view::npos) return LineStatus::NeedMore;
    if (eol + 1 >= cur.buf.size()) return LineStatus::NeedMore;
    if (cur.buf[eol + 1] != '\n') return LineStatus::BadFraming;
    line = cur.buf.substr(cur.pos, eol - cur.pos);
    cur.pos = eol + 2;
    return LineStatus::Ok;
}

// Signed integer line: optional '-', digits. Leading '+' rejected, leading
// zeros accepted (matches observed server behavior).
bool parse_int_line(std::string_view s, std::int64_t& out) {
    if (s.empty()) return false;
    if (s[0] == '+') return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

DecodeProgress decode_one(Cursor& cur, const DecodeLimits& limits, std::size_t depth,
                          RespValue& out) {
    if (depth > limits.max_depth) return protocol_error("max nesting depth exceeded");
    if (cur.remaining() == 0) return need_more();

    const char type = cur.buf[cur.pos];
    Cursor body{cur.buf, cur.pos + 1};
    std::string_view line;

    switch (type) {
        case '+':
        case '-': {
            switch (read_line(body, line)) {
                case LineStatus::NeedMore: return need_more();
                case LineStatus::BadFraming: return protocol_error("bare CR or LF in line");
                case LineStatus::Ok: break;
            }
            out = (type == '+') ? RespValue::simple(std::string(line))
                                : RespValue::error(std::string(line));
            cur.pos = body.pos;
            return DecodeProgress{DecodeProgress::State::Complete, {}, 0, {}};
        }
        case ':': {
            switch (read_line(body, line)) {
                case LineStatus::NeedMore: return need_more();
                case LineStatus::BadFraming: return protocol_error("bad integer framing");
                case LineStatus::Ok: break;
            }
            std::int64_t n = 0;
            if (!parse_int_line(line, n)) return protocol_error("non-numeric integer body");
            out = RespValue::integer(n);
            cur.pos = body.pos;
            return DecodeProgress{DecodeProgress::State::Complete, {}, 0, {}};
        }
        case '$': {
            switch (read_line(body, line)) {
                case LineStatus::NeedMore: return need_more();
                case LineStatus::BadFraming: return protocol_error("bad bulk length framing");
                case LineStatus::Ok: break;
            }
            std::int64_t len = 0;
            if (!parse_int_line(line, len)) return protocol_error("non-numeric bulk length");
            if (len == -1) {
                out = RespValue::null();
                cur.pos = body.pos;
                return DecodeProgress{DecodeProgress::State::Complete, {}, 0, {}};
            }
            if (len < 0) return protocol_error("negative bulk length");
            if (static_cast<std::size_t>(len) > limits.max_bulk_bytes) {
                return protocol_error("bulk string exceeds size limit");
            }
            const std::size_t need = static_cast<std::size_t>(len) + 2;
            if (body.remaining() < need) {
                // Whatever payload bytes are present so far are unconstrained;
                // only the trailing CRLF can invalidate the prefix.
                if (body.remaining() == need - 1 &&
                    body.buf[body.pos + static_cast<std::size_t>(len)] != '\r') {
                    return protocol_error("bulk string missing CR terminator");
                }
                return need_more();
            }
            std::string_view payload = body.buf.substr(body.pos, static_cast<std::size_t>(len));
            if (body.buf[body.pos + len] != '\r' || body.buf[body.pos + len + 1] != '\n') {
                return protocol_error("bulk string missing CRLF terminator");
            }
            out = RespValue::bulk(std::string(payload));
            cur.pos = body.pos + need;
            return DecodeProgress{DecodeProgress::State::Complete, {}, 0, {}};
        }
        case '*': {
            switch (read_line(body, line)) {
                case LineStatus::NeedMore: return need_more();
                case LineStatus::BadFraming: return protocol_error("bad array length framing");
                case LineStatus::Ok: break;
            }
            std::int64_t count = 0;
            if (!parse_int_line(line, count)) return protocol_error("non-numeric array length");
            if (count < 0) return protocol_error("negative array length");
            if (static_cast<std::size_t>(count) > limits.max_array_elements) {
                return protocol_error("array exceeds element limit");
            }
            RespValue::Array elems;
            elems.reserve(static_cast<std::size_t>(count));
            for (std::int64_t i = 0; i < count; ++i) {
                RespValue elem;
                DecodeProgress p = decode_one(body, limits, depth + 1, elem);
                if (!p.complete()) return p;
                elems.push_back(std::move(elem));
            }
            out = RespValue::array(std::move(elems));
            cur.pos = body.pos;
            return DecodeProgress{DecodeProgress::State::Complete, {}, 0, {}};
        }
        default:
            return protocol_error("unknown type byte");
    }
}

}  // namespace

std::string encode_value(const RespValue& v) {
    std::string out;
    encode_into(v, out);
    return out;
}

std::string encode_command(const std::vector<std::string>& parts) {
    if (parts.empty()) throw std::invalid_argument("command must have at least one part");
    RespValue::Array arr;
    arr.reserve(parts.size());
    for (const std::string& p : parts) arr.push_back(RespValue::bulk(p));
    return encode_value(RespValue::array(std::move(arr)));
}

DecodeProgress decode(std::string_view buffer, const DecodeLimits& limits) {
    Cursor cur{buffer, 0};
    RespValue value;
    DecodeProgress p = decode_one(cur, limits, 0, value);
    if (!p.complete()) return p;
    return DecodeProgress{DecodeProgress::State::Complete, std::move(value), cur.pos, {}};
}

}  // namespace quotecast::resp
