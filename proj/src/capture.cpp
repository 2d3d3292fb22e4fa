#include "quotecast/capture.hpp"

#include <cmath>
#include <ctime>
#include <vector>

#include "quotecast/numeric.hpp"

namespace quotecast::capture {

std::string encode_payload(const feed::QuoteRecord& record) {
    std::string out = std::to_string(record.time);
    out += ';';
    out += format_double(record.close);
    out += ';';
    out += format_double(record.change);
    out += ';';
    out += format_double(record.pct_change);
    out += ';';
    out += format_double(record.volume);
    return out;
}

feed::QuoteRecord decode_payload(const std::string& payload) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = payload.find(';', start);
        if (pos == std::string::npos) {
            fields.push_back(std::string_view(payload).substr(start));
            break;
        }
        fields.push_back(std::string_view(payload).substr(start, pos - start));
        start = pos + 1;
    }
    if (fields.size() != 5) {
        throw PayloadError("payload has " + std::to_string(fields.size()) +
                           " fields, expected 5: " + payload);
    }
    auto t = parse_int64(fields[0]);
    auto close = parse_double(fields[1]);
    auto change = parse_double(fields[2]);
    auto pct = parse_double(fields[3]);
    auto vol = parse_double(fields[4]);
    if (!t) throw PayloadError("bad time field: " + payload);
    if (!close || !change || !pct || !vol) throw PayloadError("bad numeric field: " + payload);
    if (!std::isfinite(*close) || !std::isfinite(*change) || !std::isfinite(*pct) ||
        !std::isfinite(*vol)) {
        throw PayloadError("non-finite field: " + payload);
    }
    return feed::QuoteRecord{*t, *close, *change, *pct, *vol};
}

void store_and_publish(ClientConnection& conn, const std::string& symbol,
                       const feed::QuoteRecord& record) {
    const std::string payload = encode_payload(record);
    conn.command_ok({"ZADD", symbol, std::to_string(record.time), payload});
    conn.command_ok({"PUBLISH", symbol, payload});
}

namespace {

std::string iso8601_utc(std::int64_t epoch) {
    std::time_t t = static_cast<std::time_t>(epoch);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

CaptureStats run_capture(ClientConnection& conn, feed::QuoteSource& source,
                         const feed::SymbolSet& symbols, CaptureState& state, Clock& clock,
                         ShutdownSignal& shutdown, const CaptureOptions& options, LogSink log) {
    CaptureStats stats;
    auto emit = [&](const std::string& line) {
        if (log) log(iso8601_utc(clock.now()) + " " + line);
    };

    while (!shutdown.requested()) {
        if (options.max_polls > 0 && stats.polls >= options.max_polls) break;
        ++stats.polls;

        feed::QuoteBatch batch;
        try {
            batch = source.poll(symbols, clock);
        } catch (const std::exception& e) {
            ++stats.errors;
            state.errored = true;
            emit(std::string("Error: ") + e.what());
            clock.sleep_for(std::chrono::duration_cast<std::chrono::milliseconds>(
                options.error_backoff));
            continue;
        }
        if (state.errored) {
            state.errored = false;
            ++stats.recoveries;
            emit("...recovered");
        }

        const double v = batch.at(symbols.tell_symbol()).volume;
        if (!state.prev_volume.has_value() || v != *state.prev_volume) {
            try {
                for (const std::string& sym : symbols.symbols) {
                    store_and_publish(conn, sym, batch.at(sym));
                }
            } catch (const std::exception& e) {
                // Broker errors take the same backoff path; prev_volume stays
                // untouched so the batch is retried on the next changed poll.
                ++stats.errors;
                state.errored = true;
                emit(std::string("Error: ") + e.what());
                clock.sleep_for(std::chrono::duration_cast<std::chrono::milliseconds>(
                    options.error_backoff));
                continue;
            }
            ++stats.stores;
            emit("Storing " + std::to_string(symbols.symbols.size()) + " symbol(s), tell volume " +
                 format_double(v));
        }
        state.prev_volume = v;
        clock.sleep_for(
            std::chrono::duration_cast<std::chrono::milliseconds>(options.poll_interval));
    }
    return stats;
}

}  // namespace quotecast::capture
