#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "quotecast/capture.hpp"
#include "quotecast/client.hpp"
#include "quotecast/clock.hpp"
#include "quotecast/series.hpp"

namespace quotecast::monitor {

// Per-channel payload decoder bindings consulted by monitor_channels.
class CallbackRegistry {
public:
    using Decoder = std::function<std::vector<feed::QuoteRecord>(const std::string& payload)>;

    void register_channel(const std::string& channel, Decoder decoder);

    // The standard 5-field payload decoder for a symbol channel.
    void register_default(const std::string& channel);

    const Decoder* find(const std::string& channel) const;

private:
    std::map<std::string, Decoder> decoders_;
};

// Result of one dispatch turn.
struct Decoded {
    std::string symbol;
    std::vector<feed::QuoteRecord> points;
};
struct Raw {
    ChannelMessage message;
};
struct Timeout {};
using DispatchResult = std::variant<Decoded, Raw, Timeout>;

struct ReadStats {
    std::size_t malformed = 0;  // skipped members
};

// Full-range read of the symbol's sorted set, decoded and deduplicated.
// Malformed members are skipped and counted, never fatal.
TimeSeries get_all_data(ClientConnection& conn, const std::string& symbol,
                        ReadStats* stats = nullptr);

// One listen turn: decodes "message" pushes on registered channels, passes
// everything else through raw. Decoder failures come back as Raw too.
DispatchResult monitor_channels(ClientConnection& conn, const CallbackRegistry& registry,
                                std::chrono::milliseconds timeout);

// Receives the current state of all series after each loop turn.
class ViewSink {
public:
    virtual ~ViewSink() = default;
    virtual void show(const std::map<std::string, TimeSeries>& series) = 0;
};

struct MonitorOptions {
    std::size_t ndays = 2;
    std::size_t minobs = 1500;
    std::chrono::milliseconds listen_timeout{1000};
    std::chrono::milliseconds min_redraw_interval{1000};
    std::chrono::milliseconds reconnect_backoff_start{1000};
    std::chrono::milliseconds reconnect_backoff_cap{60'000};
    std::size_t max_messages = 0;  // 0 = run until shutdown; tests bound the loop
};

using Reconnector = std::function<std::unique_ptr<ClientConnection>()>;

struct MonitorStats {
    std::size_t decoded = 0;
    std::size_t raw = 0;
    std::size_t timeouts = 0;
    std::size_t reconnects = 0;
};

// The subscriber loop: bootstrap from the sorted sets, subscribe, then
// dispatch pushes into per-symbol series and emit the view. On connection
// loss, reconnects with exponential backoff and a fresh bootstrap.
MonitorStats run_monitor(std::unique_ptr<ClientConnection> conn,
                         const std::vector<std::string>& symbols,
                         const CallbackRegistry& registry, ViewSink& view, Clock& clock,
                         ShutdownSignal& shutdown, const MonitorOptions& options = {},
                         Reconnector reconnect = {},
                         std::map<std::string, TimeSeries>* series_out = nullptr);

}  // namespace quotecast::monitor
