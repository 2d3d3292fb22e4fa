// Acceptance suite: one pass/fail line per criterion, non-zero exit on any
// failure. Each criterion is self-contained and uses independently coded
// oracles rather than the library's own logic wherever a result is checkable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "quotecast/broker.hpp"
#include "quotecast/capture.hpp"
#include "quotecast/client.hpp"
#include "quotecast/monitor.hpp"
#include "quotecast/prune.hpp"
#include "quotecast/resp.hpp"
#include "quotecast/series.hpp"
#include "quotecast/transport.hpp"

using namespace quotecast;
using resp::RespValue;
using std::chrono::milliseconds;

namespace {

// ---------------------------------------------------------------- harness --

struct Criterion {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

int g_failures = 0;

void report(int number, const std::string& name, const Criterion& c) {
    if (c.ok) {
        std::cout << "criterion " << number << " (" << name << "): PASS\n";
    } else {
        std::cout << "criterion " << number << " (" << name << "): FAIL — " << c.detail << "\n";
        ++g_failures;
    }
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

broker::BrokerConfig ephemeral_config() {
    broker::BrokerConfig c;
    c.port = 0;
    return c;
}

// ------------------------------------------------- criterion 1: RESP codec --

RespValue random_resp_value(std::mt19937_64& rng, int depth, int max_depth, int max_span) {
    std::uniform_int_distribution<int> type(0, depth < max_depth ? 5 : 4);
    std::uniform_int_distribution<int> span(0, max_span);
    std::uniform_int_distribution<int> printable(0x20, 0x7e);
    std::uniform_int_distribution<int> anybyte(0, 255);
    std::uniform_int_distribution<std::int64_t> integer(INT64_MIN, INT64_MAX);

    switch (type(rng)) {
        case 0: {
            std::string s;
            for (int i = span(rng); i > 0; --i) s.push_back(static_cast<char>(printable(rng)));
            return RespValue::simple(std::move(s));
        }
        case 1: {
            std::string s;
            for (int i = span(rng); i > 0; --i) s.push_back(static_cast<char>(printable(rng)));
            return RespValue::error(std::move(s));
        }
        case 2:
            return RespValue::integer(integer(rng));
        case 3: {
            std::string s;
            for (int i = span(rng); i > 0; --i) s.push_back(static_cast<char>(anybyte(rng)));
            return RespValue::bulk(std::move(s));
        }
        case 4:
            return RespValue::null();
        default: {
            RespValue::Array a;
            for (int i = span(rng); i > 0; --i) {
                a.push_back(random_resp_value(rng, depth + 1, max_depth, max_span / 2 + 1));
            }
            return RespValue::array(std::move(a));
        }
    }
}

Criterion criterion_resp_roundtrip() {
    Criterion c;
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(0xC0DEC);

    for (int i = 0; i < 10'000 && c.ok; ++i) {
        const RespValue v = random_resp_value(rng, 1, 8, 6);
        const std::string bytes = resp::encode_value(v);
        const auto progress = resp::decode(bytes);
        c.expect(progress.complete(), "decode incomplete at value " + std::to_string(i));
        if (!c.ok) break;
        c.expect(progress.consumed == bytes.size(),
                 "partial consumption at value " + std::to_string(i));
        c.expect(progress.value == v, "round-trip mismatch at value " + std::to_string(i));
    }

    // Every strict prefix of an encoding must report NeedMoreBytes, and the
    // whole buffer must decode to the original value.
    for (int i = 0; i < 1'000 && c.ok; ++i) {
        const RespValue v = random_resp_value(rng, 1, 4, 4);
        const std::string bytes = resp::encode_value(v);
        for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
            const auto partial = resp::decode(std::string_view(bytes).substr(0, cut));
            if (!partial.need_more()) {
                c.expect(false, "prefix of length " + std::to_string(cut) + " of encoding " +
                                    std::to_string(i) + " did not report NeedMoreBytes");
                break;
            }
        }
        const auto whole = resp::decode(bytes);
        c.expect(whole.complete() && whole.value == v && whole.consumed == bytes.size(),
                 "whole-buffer decode mismatch at encoding " + std::to_string(i));
    }

    c.expect(elapsed_seconds(start) < 10.0, "runtime exceeded 10 s");
    return c;
}

// -------------------------------------------- criterion 2: broker vs model --

// Raw TCP RESP peer: sends encoded commands and returns the exact reply bytes,
// so comparisons against the reference model are byte-for-byte.
class RawConn {
public:
    RawConn(const std::string& host, std::uint16_t port)
        : stream_(tcp_connect(host, port, std::chrono::seconds(5))) {}

    void send(const std::vector<std::string>& parts) {
        stream_->write_all(resp::encode_command(parts));
    }

    std::string read_value_bytes(milliseconds timeout = std::chrono::seconds(5)) {
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        for (;;) {
            const auto progress = resp::decode(buffer_);
            if (progress.complete()) {
                std::string raw = buffer_.substr(0, progress.consumed);
                buffer_.erase(0, progress.consumed);
                return raw;
            }
            if (progress.failed()) throw std::runtime_error("protocol error: " + progress.error);
            const auto remaining = std::chrono::duration_cast<milliseconds>(
                deadline - std::chrono::steady_clock::now());
            if (remaining.count() <= 0) throw std::runtime_error("reply timed out");
            char tmp[4096];
            const std::size_t n = stream_->read_some(tmp, sizeof tmp, remaining);
            buffer_.append(tmp, n);
        }
    }

private:
    std::unique_ptr<ByteStream> stream_;
    std::string buffer_;
};

// Independent reference model of the broker commands used in the script. It
// shares no code with the broker: plain maps, sorted on demand.
class ReferenceModel {
public:
    std::string zadd(const std::string& key, double score, const std::string& member) {
        auto& zset = sets_[key];
        const bool added = zset.find(member) == zset.end();
        zset[member] = score;
        return resp::encode_value(RespValue::integer(added ? 1 : 0));
    }

    std::string zrange(const std::string& key, std::int64_t a, std::int64_t b) const {
        std::vector<std::pair<double, std::string>> ordered;
        auto it = sets_.find(key);
        if (it != sets_.end()) {
            for (const auto& [member, score] : it->second) ordered.emplace_back(score, member);
            std::sort(ordered.begin(), ordered.end());
        }
        const std::int64_t n = static_cast<std::int64_t>(ordered.size());
        if (a < 0) a += n;
        if (b < 0) b += n;
        a = std::max<std::int64_t>(a, 0);
        b = std::min(b, n - 1);
        RespValue::Array reply;
        for (std::int64_t i = a; i <= b && i >= 0; ++i) {
            reply.push_back(RespValue::bulk(ordered[static_cast<std::size_t>(i)].second));
        }
        return resp::encode_value(RespValue::array(std::move(reply)));
    }

    std::string zremrangebyscore(const std::string& key, const std::string& lo,
                                 const std::string& hi) {
        const double min = parse_bound(lo);
        const double max = parse_bound(hi);
        std::int64_t removed = 0;
        auto it = sets_.find(key);
        if (it != sets_.end()) {
            for (auto m = it->second.begin(); m != it->second.end();) {
                if (m->second >= min && m->second <= max) {
                    m = it->second.erase(m);
                    ++removed;
                } else {
                    ++m;
                }
            }
            if (it->second.empty()) sets_.erase(it);  // emptied keys cease to exist
        }
        return resp::encode_value(RespValue::integer(removed));
    }

    std::string zcard(const std::string& key) const {
        auto it = sets_.find(key);
        const std::int64_t n = it == sets_.end() ? 0 : static_cast<std::int64_t>(it->second.size());
        return resp::encode_value(RespValue::integer(n));
    }

    std::string del(const std::vector<std::string>& keys) {
        std::int64_t removed = 0;
        for (const auto& k : keys) removed += sets_.erase(k) != 0 ? 1 : 0;
        return resp::encode_value(RespValue::integer(removed));
    }

    std::string ping() const { return resp::encode_value(RespValue::simple("PONG")); }

    // Returns the PUBLISH reply; appends the expected message push for the
    // modeled subscriber when it is subscribed to the channel.
    std::string publish(const std::string& channel, const std::string& payload,
                        std::deque<std::string>& sub_stream) const {
        const bool delivered = subscribed_.count(channel) != 0;
        if (delivered) {
            sub_stream.push_back(resp::encode_value(RespValue::array(
                {RespValue::bulk("message"), RespValue::bulk(channel), RespValue::bulk(payload)})));
        }
        return resp::encode_value(RespValue::integer(delivered ? 1 : 0));
    }

    void subscribe(const std::string& channel, std::deque<std::string>& sub_stream) {
        subscribed_.insert(channel);
        sub_stream.push_back(resp::encode_value(RespValue::array(
            {RespValue::bulk("subscribe"), RespValue::bulk(channel),
             RespValue::integer(static_cast<std::int64_t>(subscribed_.size()))})));
    }

    void unsubscribe(const std::string& channel, std::deque<std::string>& sub_stream) {
        subscribed_.erase(channel);
        sub_stream.push_back(resp::encode_value(RespValue::array(
            {RespValue::bulk("unsubscribe"), RespValue::bulk(channel),
             RespValue::integer(static_cast<std::int64_t>(subscribed_.size()))})));
    }

    bool subscribed(const std::string& channel) const { return subscribed_.count(channel) != 0; }
    std::size_t subscription_count() const { return subscribed_.size(); }

private:
    static double parse_bound(const std::string& s) {
        if (s == "-inf") return -HUGE_VAL;
        if (s == "+inf" || s == "inf") return HUGE_VAL;
        return std::stod(s);
    }

    std::map<std::string, std::map<std::string, double>> sets_;
    std::set<std::string> subscribed_;
};

Criterion criterion_broker_oracle() {
    Criterion c;
    broker::Broker broker(ephemeral_config());
    broker.start();

    RawConn cmd("127.0.0.1", broker.port());
    RawConn sub("127.0.0.1", broker.port());
    ReferenceModel model;
    std::deque<std::string> expected_sub_stream;

    std::mt19937_64 script_rng(0xBEEF);

    const std::vector<std::string> keys = {"ES=F", "CL=F"};
    const std::vector<std::string> members = {"m0", "m1", "m2", "m3", "m4", "m5", "m6", "m7"};
    const std::vector<std::string> channels = {"ES=F", "alerts"};
    const std::vector<std::string> bounds = {"-inf", "-3", "0", "2", "+inf"};

    auto pick = [&script_rng](const std::vector<std::string>& pool) -> const std::string& {
        std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
        return pool[d(script_rng)];
    };
    auto small_int = [&script_rng](int lo, int hi) {
        std::uniform_int_distribution<int> d(lo, hi);
        return d(script_rng);
    };

    auto check_reply = [&](int step, const std::vector<std::string>& parts,
                           const std::string& expected) {
        cmd.send(parts);
        const std::string actual = cmd.read_value_bytes();
        if (actual != expected) {
            c.expect(false, "step " + std::to_string(step) + " (" + parts[0] +
                                "): reply bytes diverge from the reference model");
        }
    };
    auto drain_sub = [&](int step) {
        while (!expected_sub_stream.empty()) {
            const std::string expected = expected_sub_stream.front();
            expected_sub_stream.pop_front();
            const std::string actual = sub.read_value_bytes();
            if (actual != expected) {
                c.expect(false, "step " + std::to_string(step) +
                                    ": subscriber stream diverges from the reference model");
                break;
            }
        }
    };

    for (int step = 0; step < 500 && c.ok; ++step) {
        switch (small_int(0, 8)) {
            case 0: {  // ZADD
                const std::string key = pick(keys);
                const int score = small_int(-5, 5);
                const std::string member = pick(members);
                check_reply(step, {"ZADD", key, std::to_string(score), member},
                            model.zadd(key, score, member));
                break;
            }
            case 1: {  // ZRANGE
                const std::string key = pick(keys);
                const int a = small_int(-6, 6);
                const int b = small_int(-6, 6);
                check_reply(step, {"ZRANGE", key, std::to_string(a), std::to_string(b)},
                            model.zrange(key, a, b));
                break;
            }
            case 2: {  // ZREMRANGEBYSCORE
                const std::string key = pick(keys);
                const std::string lo = pick(bounds);
                const std::string hi = pick(bounds);
                check_reply(step, {"ZREMRANGEBYSCORE", key, lo, hi},
                            model.zremrangebyscore(key, lo, hi));
                break;
            }
            case 3: {  // ZCARD
                const std::string key = pick(keys);
                check_reply(step, {"ZCARD", key}, model.zcard(key));
                break;
            }
            case 4: {  // DEL
                const std::string key = pick(keys);
                check_reply(step, {"DEL", key}, model.del({key}));
                break;
            }
            case 5:
                check_reply(step, {"PING"}, model.ping());
                break;
            case 6: {  // PUBLISH
                const std::string channel = pick(channels);
                const std::string payload = "payload-" + std::to_string(step);
                check_reply(step, {"PUBLISH", channel, payload},
                            model.publish(channel, payload, expected_sub_stream));
                drain_sub(step);
                break;
            }
            case 7: {  // SUBSCRIBE on the dedicated subscriber connection
                const std::string channel = pick(channels);
                if (model.subscribed(channel)) break;
                sub.send({"SUBSCRIBE", channel});
                model.subscribe(channel, expected_sub_stream);
                drain_sub(step);
                break;
            }
            default: {  // UNSUBSCRIBE
                const std::string channel = pick(channels);
                if (!model.subscribed(channel)) break;
                sub.send({"UNSUBSCRIBE", channel});
                model.unsubscribe(channel, expected_sub_stream);
                drain_sub(step);
                break;
            }
        }
    }

    broker.stop();
    return c;
}

// --------------------------------------------- criterion 3: end-to-end run --

// View sink that keeps the latest snapshot for cross-thread polling.
class SnapshotView final : public monitor::ViewSink {
public:
    void show(const std::map<std::string, monitor::TimeSeries>& series) override {
        std::lock_guard<std::mutex> lk(mu_);
        latest_ = series;
    }

    std::size_t count(const std::string& symbol) const {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = latest_.find(symbol);
        return it == latest_.end() ? 0 : it->second.size();
    }

private:
    mutable std::mutex mu_;
    std::map<std::string, monitor::TimeSeries> latest_;
};

std::map<std::int64_t, feed::QuoteRecord> as_time_map(const monitor::TimeSeries& series,
                                                      bool* duplicates = nullptr) {
    std::map<std::int64_t, feed::QuoteRecord> out;
    for (const auto& p : series.points()) {
        if (duplicates != nullptr && out.count(p.time) != 0) *duplicates = true;
        out.emplace(p.time, p);
    }
    return out;
}

Criterion criterion_end_to_end() {
    Criterion c;
    const auto start = std::chrono::steady_clock::now();

    broker::Broker broker(ephemeral_config());
    broker.start();
    const std::vector<std::string> symbols = {"BTC=F", "CL=F", "ES=F", "GC=F"};
    const feed::SymbolSet set(symbols, 2);

    // Capture: 300 seed-fixed synthetic polls under virtual time.
    {
        feed::SyntheticConfig config;
        config.seed = 7;
        config.p_trade = 0.9;
        feed::SyntheticSource source(config);
        VirtualClock clock;
        ShutdownSignal shutdown;
        capture::CaptureState state;
        capture::CaptureOptions options;
        options.max_polls = 300;
        auto conn = connect("127.0.0.1", broker.port());
        auto stats = capture::run_capture(*conn, source, set, state, clock, shutdown, options);
        c.expect(stats.polls == 300, "capture did not complete 300 polls");
        c.expect(stats.stores > 0, "capture stored nothing");
    }

    // The stored truth, decoded directly from the broker.
    auto reader = connect("127.0.0.1", broker.port());
    std::map<std::string, std::map<std::int64_t, feed::QuoteRecord>> stored;
    for (const auto& s : symbols) {
        stored[s] = as_time_map(monitor::get_all_data(*reader, s));
        c.expect(!stored[s].empty(), "no stored points for " + s);
    }
    if (!c.ok) {
        broker.stop();
        return c;
    }

    // Monitor: bootstrap plus live pushes on a separate thread.
    SnapshotView view;
    ShutdownSignal mon_shutdown;
    SystemClock mon_clock(&mon_shutdown);
    monitor::CallbackRegistry registry;
    for (const auto& s : symbols) registry.register_default(s);
    monitor::MonitorOptions options;
    options.listen_timeout = milliseconds(50);
    options.min_redraw_interval = milliseconds(0);
    std::map<std::string, monitor::TimeSeries> series;
    std::thread mon([&] {
        monitor::run_monitor(connect("127.0.0.1", broker.port()), symbols, registry, view,
                             mon_clock, mon_shutdown, options, {}, &series);
    });

    // Wait until the monitor is subscribed: replicas of already-stored points
    // are dedup no-ops, and the PUBLISH reply hits 1 once it listens.
    for (const auto& s : symbols) {
        const std::string replica = capture::encode_payload(stored[s].begin()->second);
        while (reader->command_ok({"PUBLISH", s, replica}) != RespValue::integer(1)) {
            std::this_thread::sleep_for(milliseconds(5));
        }
    }

    // Keep-first: collide with the first stored ES=F timestamp, different close.
    const feed::QuoteRecord original = stored["ES=F"].begin()->second;
    feed::QuoteRecord collider = original;
    collider.close += 123.0;
    reader->command_ok({"PUBLISH", "ES=F", capture::encode_payload(collider)});

    // One fresh sentinel point per symbol, stored and published like capture
    // would, so series and stored sets stay comparable.
    for (const auto& s : symbols) {
        feed::QuoteRecord sentinel = stored[s].rbegin()->second;
        sentinel.time += 3600;
        sentinel.volume += 1;
        capture::store_and_publish(*reader, s, sentinel);
        stored[s].emplace(sentinel.time, sentinel);
    }

    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(20);
    for (const auto& s : symbols) {
        while (view.count(s) < stored[s].size() &&
               std::chrono::steady_clock::now() < deadline) {
            std::this_thread::sleep_for(milliseconds(5));
        }
    }
    mon_shutdown.request();
    mon.join();
    broker.stop();

    for (const auto& s : symbols) {
        bool duplicates = false;
        const auto got = as_time_map(series.at(s), &duplicates);
        c.expect(!duplicates, "duplicate timestamps in the monitor series for " + s);
        c.expect(got == stored[s],
                 "monitor series for " + s + " differs from the decoded stored members");
    }
    const auto& es = series.at("ES=F").points();
    auto hit = std::find_if(es.begin(), es.end(),
                            [&](const feed::QuoteRecord& p) { return p.time == original.time; });
    c.expect(hit != es.end() && hit->close == original.close,
             "colliding timestamp did not keep the first-arrived point");
    c.expect(elapsed_seconds(start) < 30.0, "runtime exceeded 30 s");
    return c;
}

// ---------------------------------------------- criterion 4: volume tell --

class ScriptedVolumes final : public feed::QuoteSource {
public:
    ScriptedVolumes(std::vector<double> tell_volumes, bool vary_other)
        : tell_volumes_(std::move(tell_volumes)), vary_other_(vary_other) {}

    feed::QuoteBatch poll(const feed::SymbolSet& symbols, const Clock& clock) override {
        if (next_ >= tell_volumes_.size()) throw feed::SourceError("script exhausted");
        feed::QuoteBatch batch;
        for (const auto& s : symbols.symbols) {
            feed::QuoteRecord r;
            r.time = clock.now();
            r.close = 100;
            r.volume = s == symbols.tell_symbol()
                           ? tell_volumes_[next_]
                           : (vary_other_ ? 50.0 + static_cast<double>(next_) : 50.0);
            batch[s] = r;
        }
        ++next_;
        return batch;
    }

private:
    std::vector<double> tell_volumes_;
    bool vary_other_;
    std::size_t next_ = 0;
};

Criterion criterion_volume_tell() {
    Criterion c;
    broker::Broker broker(ephemeral_config());
    broker.start();
    const feed::SymbolSet set({"A", "B"}, 0);

    {
        auto conn = connect("127.0.0.1", broker.port());
        ScriptedVolumes source({10, 10, 12, 12, 13}, false);
        VirtualClock clock;
        ShutdownSignal shutdown;
        capture::CaptureState state;
        capture::CaptureOptions options;
        options.max_polls = 5;
        auto stats = capture::run_capture(*conn, source, set, state, clock, shutdown, options);
        c.expect(stats.stores == 3, "expected 3 stored batches, got " +
                                        std::to_string(stats.stores));
        // Stored times pin the stores to polls 1, 3 and 5 on the 10 s cadence.
        const monitor::TimeSeries stored = monitor::get_all_data(*conn, "A");
        std::vector<std::int64_t> times;
        for (const auto& p : stored.points()) times.push_back(p.time);
        const std::int64_t t0 = 1'647'381'600;
        c.expect(times == std::vector<std::int64_t>{t0, t0 + 20, t0 + 40},
                 "stores did not land on polls 1, 3 and 5");
        conn->command_ok({"DEL", "A", "B"});
    }

    {
        // Constant tell volume with a changing non-tell volume: after the
        // unconditional first store, nothing further is stored.
        auto conn = connect("127.0.0.1", broker.port());
        ScriptedVolumes source({10, 10, 10, 10, 10, 10}, true);
        VirtualClock clock;
        ShutdownSignal shutdown;
        capture::CaptureState state;
        capture::CaptureOptions prime;
        prime.max_polls = 1;
        capture::run_capture(*conn, source, set, state, clock, shutdown, prime);

        capture::CaptureOptions rest;
        rest.max_polls = 5;
        auto stats = capture::run_capture(*conn, source, set, state, clock, shutdown, rest);
        c.expect(stats.stores == 0, "a non-tell volume change triggered a store");
    }

    broker.stop();
    return c;
}

// ------------------------------------------- criterion 5: windowing oracle --

// Brute-force oracle: enumerate distinct UTC days, count, filter, and window.
monitor::TimeSeries oracle_window(const monitor::TimeSeries& series, std::size_t n,
                                  std::size_t minobs) {
    std::map<std::int64_t, std::size_t> per_day;
    for (const auto& p : series.points()) ++per_day[p.time / 86'400];
    if (per_day.size() < n) return series;
    std::vector<std::int64_t> qualifying;
    for (const auto& [day, count] : per_day) {
        if (count > minobs) qualifying.push_back(day);
    }
    if (qualifying.empty()) return series;
    const std::size_t keep = std::min(n, qualifying.size());
    const std::int64_t first_day = qualifying[qualifying.size() - keep];
    monitor::TimeSeries out(series.symbol());
    for (const auto& p : series.points()) {
        if (p.time >= first_day * 86'400) out.append_dedup(p);
    }
    return out;
}

monitor::TimeSeries series_with_day_counts(const std::vector<std::size_t>& counts,
                                           std::int64_t first_day = 19'000) {
    monitor::TimeSeries s("X");
    for (std::size_t d = 0; d < counts.size(); ++d) {
        const std::int64_t base = (first_day + static_cast<std::int64_t>(d)) * 86'400;
        for (std::size_t i = 0; i < counts[d]; ++i) {
            feed::QuoteRecord r;
            r.time = base + static_cast<std::int64_t>(i * 10);
            r.close = 100.0 + static_cast<double>(i);
            s.append_dedup(r);
        }
    }
    return s;
}

Criterion criterion_windowing() {
    Criterion c;

    // Hand-traced cases, n = 2, minobs = 1500.
    {
        const auto s = series_with_day_counts({2000, 1600, 1800});
        const auto w = monitor::most_recent_n_days(s, 2, 1500);
        c.expect(w.size() == 1600 + 1800 &&
                     w.points().front().time == (19'001) * 86'400LL,
                 "counts {2000,1600,1800} did not keep from day 2");
    }
    {
        const auto s = series_with_day_counts({2000, 1600, 900});
        const auto w = monitor::most_recent_n_days(s, 2, 1500);
        c.expect(w == s, "counts {2000,1600,900} did not keep all points");
    }
    {
        const auto s = series_with_day_counts({2000});
        const auto w = monitor::most_recent_n_days(s, 2, 1500);
        c.expect(w == s, "fewer distinct days than n did not pass through unchanged");
    }

    std::mt19937_64 rng(0x5EED);
    std::uniform_int_distribution<std::size_t> num_days(1, 7);
    std::uniform_int_distribution<std::size_t> day_count(0, 60);
    std::uniform_int_distribution<std::size_t> pick_n(1, 4);
    std::uniform_int_distribution<std::size_t> pick_minobs(0, 50);
    for (int i = 0; i < 500 && c.ok; ++i) {
        std::vector<std::size_t> counts(num_days(rng));
        for (auto& count : counts) count = day_count(rng);
        const auto s = series_with_day_counts(counts);
        const std::size_t n = pick_n(rng);
        const std::size_t minobs = pick_minobs(rng);
        const auto got = monitor::most_recent_n_days(s, n, minobs);
        const auto want = oracle_window(s, n, minobs);
        c.expect(got == want, "diverged from the brute-force oracle on random series " +
                                  std::to_string(i));
    }
    return c;
}

// ------------------------------------------------ criterion 6: resilience --

Criterion criterion_resilience() {
    Criterion c;
    broker::Broker broker(ephemeral_config());
    broker.start();

    feed::SyntheticConfig config;
    config.seed = 11;
    config.p_trade = 1.0;  // volume always advances: every good poll stores
    auto inner = std::make_unique<feed::SyntheticSource>(config);
    feed::FaultInjectingSource source(std::move(inner), {3, 4, 5});

    const feed::SymbolSet set({"ES=F"}, 0);
    auto conn = connect("127.0.0.1", broker.port());
    VirtualClock clock;
    ShutdownSignal shutdown;
    capture::CaptureState state;
    capture::CaptureOptions options;
    options.max_polls = 8;
    std::vector<std::string> log;
    auto stats = capture::run_capture(*conn, source, set, state, clock, shutdown, options,
                                      [&log](const std::string& line) { log.push_back(line); });
    broker.stop();

    c.expect(stats.polls == 8, "expected 8 polls");
    c.expect(stats.errors == 3, "expected exactly 3 failed polls");
    c.expect(stats.recoveries == 1, "expected exactly one recovery");
    c.expect(stats.stores == 5, "expected the 5 good polls to store");

    const std::size_t recovered_lines = static_cast<std::size_t>(std::count_if(
        log.begin(), log.end(),
        [](const std::string& line) { return line.find("recovered") != std::string::npos; }));
    c.expect(recovered_lines == 1, "expected exactly one recovery log line");

    // 5 good polls on the 10 s cadence plus 3 backoffs of 15 s, exactly.
    c.expect(clock.total_slept_ms() == (5 * 10 + 3 * 15) * 1000,
             "virtual-time accounting off: slept " + std::to_string(clock.total_slept_ms()) +
                 " ms");
    return c;
}

// -------------------------------------------- criterion 7: pub/sub ordering --

Criterion criterion_pubsub_ordering() {
    Criterion c;
    broker::Broker broker(ephemeral_config());
    broker.start();

    std::vector<std::unique_ptr<ClientConnection>> subscribers;
    for (int i = 0; i < 3; ++i) {
        subscribers.push_back(connect("127.0.0.1", broker.port()));
        subscribers.back()->subscribe("ticker");
    }

    auto publisher = connect("127.0.0.1", broker.port());
    for (int i = 1; i <= 1000 && c.ok; ++i) {
        std::ostringstream payload;
        payload << "msg-" << i;
        const auto reply = publisher->command_ok({"PUBLISH", "ticker", payload.str()});
        c.expect(reply == RespValue::integer(3),
                 "PUBLISH " + std::to_string(i) + " did not report 3 receivers");
    }

    for (std::size_t s = 0; s < subscribers.size() && c.ok; ++s) {
        for (int i = 1; i <= 1000; ++i) {
            auto msg = subscribers[s]->listen(std::chrono::seconds(5));
            if (!msg || msg->kind != "message" || msg->channel != "ticker" ||
                msg->payload != "msg-" + std::to_string(i)) {
                c.expect(false, "subscriber " + std::to_string(s) +
                                    " broke order at message " + std::to_string(i));
                break;
            }
        }
    }

    broker.stop();
    return c;
}

// ---------------------------------------------- criterion 8: prune bound --

Criterion criterion_prune_bound() {
    Criterion c;
    broker::Broker broker(ephemeral_config());
    broker.start();
    auto conn = connect("127.0.0.1", broker.port());

    const std::int64_t now = 1'700'000'000;
    tools::RetentionPolicy policy;
    policy.max_age = std::chrono::hours(24) * 30;
    policy.max_points = 0;
    const std::int64_t cutoff = now - policy.max_age.count();

    auto seed = [&](const std::string& sym, std::int64_t first, int count, std::int64_t step) {
        for (int i = 0; i < count; ++i) {
            const std::int64_t t = first + i * step;
            conn->command_ok({"ZADD", sym, std::to_string(t),
                              std::to_string(t) + ";100;0;0;" + std::to_string(i)});
        }
    };

    // A set straddling the cutoff and a fully stale one.
    seed("MIX", cutoff - 5 * 3600, 5, 3600);
    seed("MIX", cutoff + 3600, 7, 3600);
    seed("STALE", cutoff - 200 * 3600, 6, 3600);

    auto result = tools::prune(*conn, {"MIX", "STALE"}, policy, now);
    c.expect(result.removed.at("MIX") == 5, "straddling set: wrong removal count");
    c.expect(result.removed.at("STALE") == 5, "all-stale set: wrong removal count");
    c.expect(result.failed.empty(), "prune reported failures");

    auto oldest_time = [&](const std::string& sym) {
        auto range = conn->command_ok({"ZRANGE", sym, "0", "0"});
        const auto& arr = std::get<RespValue::Array>(range.node);
        return capture::decode_payload(std::get<resp::BulkString>(arr.at(0).node).bytes).time;
    };
    c.expect(oldest_time("MIX") >= cutoff, "minimum remaining score is below the cutoff");
    c.expect(conn->command_ok({"ZCARD", "STALE"}) == RespValue::integer(1),
             "all-stale symbol did not retain exactly one point");
    c.expect(oldest_time("STALE") == cutoff - 200 * 3600 + 5 * 3600,
             "all-stale symbol did not keep its newest point");

    result = tools::prune(*conn, {"MIX", "STALE"}, policy, now);
    c.expect(result.removed.at("MIX") == 0 && result.removed.at("STALE") == 0,
             "second prune was not a no-op");

    broker.stop();
    return c;
}

// --------------------------------------------- criterion 9: payload codec --

Criterion criterion_payload_codec() {
    Criterion c;
    std::mt19937_64 rng(0xFEED);
    std::uniform_int_distribution<std::int64_t> time_dist(0, 4'000'000'000LL);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_int_distribution<int> scale(-6, 9);

    auto random_double = [&] { return unit(rng) * std::pow(10.0, scale(rng)); };

    for (int i = 0; i < 10'000 && c.ok; ++i) {
        feed::QuoteRecord r;
        r.time = time_dist(rng);
        r.close = random_double();
        r.change = random_double();
        r.pct_change = random_double();
        r.volume = std::abs(random_double());
        const auto back = capture::decode_payload(capture::encode_payload(r));
        c.expect(back == r, "round-trip mismatch at record " + std::to_string(i));
    }

    const auto r = capture::decode_payload("1647381600;4261.75;-0.25;-0.0059;1200000");
    c.expect(r.time == 1'647'381'600 && r.close == 4261.75 && r.change == -0.25 &&
                 r.pct_change == -0.0059 && r.volume == 1'200'000,
             "canonical payload did not parse to the expected fields");
    return c;
}

}  // namespace

int main() {
    report(1, "resp codec round-trip and incremental decode", criterion_resp_roundtrip());
    report(2, "broker equivalence with an independent reference model", criterion_broker_oracle());
    report(3, "capture -> broker -> monitor end-to-end equality", criterion_end_to_end());
    report(4, "volume-tell store gating", criterion_volume_tell());
    report(5, "most_recent_n_days vs brute-force oracle", criterion_windowing());
    report(6, "fault backoff and recovery with exact virtual time", criterion_resilience());
    report(7, "pub/sub fan-out ordering", criterion_pubsub_ordering());
    report(8, "retention prune bound and idempotence", criterion_prune_bound());
    report(9, "payload codec round-trip", criterion_payload_codec());

    if (g_failures != 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all 9 criteria passed\n";
    return 0;
}
