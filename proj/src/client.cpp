#include "quotecast/client.hpp"

namespace quotecast {

namespace {

using Ms = std::chrono::milliseconds;
using SteadyClock = std::chrono::steady_clock;

std::string push_field_to_string(const resp::RespValue& v) {
    if (const auto* b = std::get_if<resp::BulkString>(&v.node)) return b->bytes;
    if (const auto* s = std::get_if<resp::SimpleString>(&v.node)) return s->text;
    if (const auto* n = std::get_if<std::int64_t>(&v.node)) return std::to_string(*n);
    throw ProtocolError("unexpected element type in push message");
}

ChannelMessage to_channel_message(const resp::RespValue& v) {
    const auto* arr = std::get_if<resp::RespValue::Array>(&v.node);
    if (arr == nullptr || arr->size() != 3) {
        throw ProtocolError("push message is not a 3-element array");
    }
    return ChannelMessage{push_field_to_string((*arr)[0]), push_field_to_string((*arr)[1]),
                          push_field_to_string((*arr)[2])};
}

}  // namespace

ClientConnection::ClientConnection(std::unique_ptr<ByteStream> stream,
                                   resp::DecodeLimits limits)
    : stream_(std::move(stream)), limits_(limits) {}

resp::RespValue ClientConnection::read_value(Ms timeout) {
    const auto deadline = SteadyClock::now() + timeout;
    for (;;) {
        resp::DecodeProgress p = resp::decode(inbox_, limits_);
        if (p.complete()) {
            inbox_.erase(0, p.consumed);
            return std::move(p.value);
        }
        if (p.failed()) throw ProtocolError("protocol error: " + p.error);

        const auto now = SteadyClock::now();
        if (now >= deadline) throw IoError("timed out waiting for reply");
        const auto left = std::chrono::duration_cast<Ms>(deadline - now);
        char buf[4096];
        std::size_t got = stream_->read_some(buf, sizeof(buf), left);
        if (got > 0) inbox_.append(buf, got);
    }
}

resp::RespValue ClientConnection::command(const std::vector<std::string>& parts, Ms timeout) {
    stream_->write_all(resp::encode_command(parts));
    return read_value(timeout);
}

resp::RespValue ClientConnection::command_ok(const std::vector<std::string>& parts, Ms timeout) {
    resp::RespValue v = command(parts, timeout);
    if (const auto* e = std::get_if<resp::Error>(&v.node)) {
        throw ProtocolError("server error: " + e->text);
    }
    return v;
}

std::optional<ChannelMessage> ClientConnection::read_push(Ms timeout) {
    const auto deadline = SteadyClock::now() + timeout;
    for (;;) {
        resp::DecodeProgress p = resp::decode(inbox_, limits_);
        if (p.complete()) {
            inbox_.erase(0, p.consumed);
            return to_channel_message(p.value);
        }
        if (p.failed()) throw ProtocolError("protocol error: " + p.error);

        const auto now = SteadyClock::now();
        if (now >= deadline) return std::nullopt;
        const auto left = std::chrono::duration_cast<Ms>(deadline - now);
        char buf[4096];
        std::size_t got = stream_->read_some(buf, sizeof(buf), left);
        if (got > 0) inbox_.append(buf, got);
    }
}

std::optional<ChannelMessage> ClientConnection::listen(Ms timeout) {
    if (!pending_.empty()) {
        ChannelMessage msg = std::move(pending_.front());
        pending_.erase(pending_.begin());
        return msg;
    }
    return read_push(timeout);
}

void ClientConnection::subscribe(const std::string& channel, Ms timeout) {
    stream_->write_all(resp::encode_command({"SUBSCRIBE", channel}));
    // Pushes on already-subscribed channels may precede the ack; keep them.
    const auto deadline = SteadyClock::now() + timeout;
    for (;;) {
        const auto now = SteadyClock::now();
        if (now >= deadline) throw IoError("timed out waiting for subscribe ack");
        auto msg = read_push(std::chrono::duration_cast<Ms>(deadline - now));
        if (!msg) continue;
        if (msg->kind == "subscribe" && msg->channel == channel) {
            ++subscriptions_;
            return;
        }
        pending_.push_back(std::move(*msg));
    }
}

void ClientConnection::unsubscribe(const std::string& channel, Ms timeout) {
    stream_->write_all(resp::encode_command({"UNSUBSCRIBE", channel}));
    const auto deadline = SteadyClock::now() + timeout;
    for (;;) {
        const auto now = SteadyClock::now();
        if (now >= deadline) throw IoError("timed out waiting for unsubscribe ack");
        auto msg = read_push(std::chrono::duration_cast<Ms>(deadline - now));
        if (!msg) continue;
        if (msg->kind == "unsubscribe" && msg->channel == channel) {
            if (subscriptions_ > 0) --subscriptions_;
            return;
        }
        pending_.push_back(std::move(*msg));
    }
}

void ClientConnection::close() {
    if (stream_) stream_->close();
}

std::unique_ptr<ClientConnection> connect(const std::string& host, std::uint16_t port,
                                          Ms timeout) {
    auto conn = std::make_unique<ClientConnection>(tcp_connect(host, port, timeout));
    resp::RespValue pong = conn->command({"PING"}, timeout);
    const auto* s = std::get_if<resp::SimpleString>(&pong.node);
    if (s == nullptr || (s->text != "PONG" && s->text != "OK")) {
        throw ProtocolError("unexpected PING reply");
    }
    return conn;
}

}  // namespace quotecast
