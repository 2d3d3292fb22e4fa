#include "quotecast/monitor.hpp"

namespace quotecast::monitor {

void CallbackRegistry::register_channel(const std::string& channel, Decoder decoder) {
    decoders_[channel] = std::move(decoder);
}

void CallbackRegistry::register_default(const std::string& channel) {
    register_channel(channel, [](const std::string& payload) {
        return std::vector<feed::QuoteRecord>{capture::decode_payload(payload)};
    });
}

const CallbackRegistry::Decoder* CallbackRegistry::find(const std::string& channel) const {
    auto it = decoders_.find(channel);
    return it == decoders_.end() ? nullptr : &it->second;
}

TimeSeries get_all_data(ClientConnection& conn, const std::string& symbol, ReadStats* stats) {
    resp::RespValue reply = conn.command_ok({"ZRANGE", symbol, "0", "-1"});
    const auto* arr = std::get_if<resp::RespValue::Array>(&reply.node);
    if (arr == nullptr) throw ProtocolError("ZRANGE reply is not an array");

    TimeSeries series(symbol);
    for (const resp::RespValue& e : *arr) {
        const auto* member = std::get_if<resp::BulkString>(&e.node);
        if (member == nullptr) {
            if (stats) ++stats->malformed;
            continue;
        }
        try {
            series.append_dedup(capture::decode_payload(member->bytes));
        } catch (const capture::PayloadError&) {
            if (stats) ++stats->malformed;
        }
    }
    return series;
}

DispatchResult monitor_channels(ClientConnection& conn, const CallbackRegistry& registry,
                                std::chrono::milliseconds timeout) {
    auto msg = conn.listen(timeout);
    if (!msg) return Timeout{};
    if (msg->kind != "message") return Raw{std::move(*msg)};
    const CallbackRegistry::Decoder* decoder = registry.find(msg->channel);
    if (decoder == nullptr) return Raw{std::move(*msg)};
    try {
        std::vector<feed::QuoteRecord> points = (*decoder)(msg->payload);
        return Decoded{msg->channel, std::move(points)};
    } catch (const capture::PayloadError&) {
        return Raw{std::move(*msg)};
    }
}

namespace {

void bootstrap(ClientConnection& conn, const std::vector<std::string>& symbols,
               const MonitorOptions& options, std::map<std::string, TimeSeries>& series) {
    for (const std::string& sym : symbols) {
        TimeSeries full = get_all_data(conn, sym);
        series[sym] = most_recent_n_days(full, options.ndays, options.minobs);
    }
    for (const std::string& sym : symbols) conn.subscribe(sym);
}

}  // namespace

MonitorStats run_monitor(std::unique_ptr<ClientConnection> conn,
                         const std::vector<std::string>& symbols,
                         const CallbackRegistry& registry, ViewSink& view, Clock& clock,
                         ShutdownSignal& shutdown, const MonitorOptions& options,
                         Reconnector reconnect, std::map<std::string, TimeSeries>* series_out) {
    MonitorStats stats;
    std::map<std::string, TimeSeries> series;
    bootstrap(*conn, symbols, options, series);

    std::int64_t last_draw_ms = -1;
    auto maybe_draw = [&](bool force) {
        const std::int64_t now_ms = clock.now() * 1000;
        if (!force && last_draw_ms >= 0 &&
            now_ms - last_draw_ms < options.min_redraw_interval.count()) {
            return;
        }
        last_draw_ms = now_ms;
        view.show(series);
    };
    maybe_draw(true);

    std::size_t handled = 0;
    while (!shutdown.requested()) {
        if (options.max_messages > 0 && handled >= options.max_messages) break;

        DispatchResult result;
        try {
            result = monitor_channels(*conn, registry, options.listen_timeout);
        } catch (const std::exception&) {
            // Connection lost: back off, reconnect, bootstrap from scratch.
            if (!reconnect) throw;
            auto backoff = options.reconnect_backoff_start;
            for (;;) {
                if (shutdown.requested()) return stats;
                clock.sleep_for(backoff);
                backoff = std::min(backoff * 2, options.reconnect_backoff_cap);
                try {
                    conn = reconnect();
                    series.clear();
                    bootstrap(*conn, symbols, options, series);
                    ++stats.reconnects;
                    break;
                } catch (const std::exception&) {
                    continue;
                }
            }
            continue;
        }

        if (const auto* d = std::get_if<Decoded>(&result)) {
            ++stats.decoded;
            ++handled;
            auto it = series.find(d->symbol);
            if (it == series.end()) {
                it = series.emplace(d->symbol, TimeSeries(d->symbol)).first;
            }
            it->second.append_dedup(d->points);
            maybe_draw(false);
        } else if (std::get_if<Raw>(&result)) {
            ++stats.raw;
            ++handled;
            maybe_draw(false);
        } else {
            ++stats.timeouts;
            maybe_draw(false);
        }
    }
    maybe_draw(true);
    if (series_out) *series_out = std::move(series);
    return stats;
}

}  // namespace quotecast::monitor
