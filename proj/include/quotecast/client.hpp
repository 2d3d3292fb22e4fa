#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "quotecast/resp.hpp"
#include "quotecast/transport.hpp"

namespace quotecast {

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One pub/sub push: kind is "message", "subscribe", "unsubscribe", ...
struct ChannelMessage {
    std::string kind;
    std::string channel;
    std::string payload;

    bool operator==(const ChannelMessage&) const = default;
};

// Single-owner RESP2 client. Request/response via command(); once subscribed,
// pushes are drained with listen().
class ClientConnection {
public:
    explicit ClientConnection(std::unique_ptr<ByteStream> stream,
                              resp::DecodeLimits limits = {});

    // Sends one command and returns exactly one decoded reply. Server Error
    // replies come back as the Error variant, they are not thrown.
    resp::RespValue command(const std::vector<std::string>& parts,
                            std::chrono::milliseconds timeout = std::chrono::seconds(5));

    // Convenience: command() that throws ProtocolError on an Error reply.
    resp::RespValue command_ok(const std::vector<std::string>& parts,
                               std::chrono::milliseconds timeout = std::chrono::seconds(5));

    // Blocks for one push message; nullopt on timeout. Requires an active
    // subscription (pushes arrive only in subscribed state).
    std::optional<ChannelMessage> listen(std::chrono::milliseconds timeout);

    void subscribe(const std::string& channel,
                   std::chrono::milliseconds timeout = std::chrono::seconds(5));
    void unsubscribe(const std::string& channel,
                     std::chrono::milliseconds timeout = std::chrono::seconds(5));

    std::size_t subscription_count() const { return subscriptions_; }

    void close();

private:
    // Reads one complete top-level value, failing after the deadline.
    resp::RespValue read_value(std::chrono::milliseconds timeout);

    // Reads one push from the wire, bypassing the pending queue.
    std::optional<ChannelMessage> read_push(std::chrono::milliseconds timeout);

    std::unique_ptr<ByteStream> stream_;
    resp::DecodeLimits limits_;
    std::string inbox_;
    std::vector<ChannelMessage> pending_;  // pushes seen while awaiting an ack
    std::size_t subscriptions_ = 0;
};

// Opens a TCP connection and verifies it with a PING round trip.
std::unique_ptr<ClientConnection> connect(const std::string& host, std::uint16_t port,
                                          std::chrono::milliseconds timeout =
                                              std::chrono::seconds(5));

}  // namespace quotecast
