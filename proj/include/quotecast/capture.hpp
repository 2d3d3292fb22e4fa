#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>

#include "quotecast/client.hpp"
#include "quotecast/clock.hpp"
#include "quotecast/feed.hpp"

namespace quotecast::capture {

struct PayloadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Canonical wire payload: time;close;change;pct_change;volume. Time is a
// decimal integer, the rest shortest round-trip decimals, so
// decode_payload(encode_payload(r)) == r exactly.
std::string encode_payload(const feed::QuoteRecord& record);

// Throws PayloadError on wrong field count or unparseable number.
feed::QuoteRecord decode_payload(const std::string& payload);

// ZADD score=time member=payload, then PUBLISH the identical payload on the
// symbol's channel.
void store_and_publish(ClientConnection& conn, const std::string& symbol,
                       const feed::QuoteRecord& record);

struct CaptureOptions {
    std::chrono::seconds poll_interval{10};
    std::chrono::seconds error_backoff{15};
    std::size_t max_polls = 0;  // 0 = run until shutdown
};

struct CaptureState {
    std::optional<double> prev_volume;
    bool errored = false;
};

struct CaptureStats {
    std::size_t polls = 0;
    std::size_t stores = 0;    // batches stored (all symbols each)
    std::size_t errors = 0;
    std::size_t recoveries = 0;
};

// One log line per event, ISO-8601 UTC timestamp prefix applied by the loop.
using LogSink = std::function<void(const std::string&)>;

// The store-and-publish daemon loop. Polls, stores every symbol when the tell
// symbol's volume moved, absorbs source failures into the backoff path. Exits
// only on shutdown or after max_polls.
CaptureStats run_capture(ClientConnection& conn, feed::QuoteSource& source,
                         const feed::SymbolSet& symbols, CaptureState& state, Clock& clock,
                         ShutdownSignal& shutdown, const CaptureOptions& options = {},
                         LogSink log = {});

}  // namespace quotecast::capture
