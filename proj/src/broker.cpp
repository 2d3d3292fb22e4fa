#include "quotecast/broker.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <limits>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "quotecast/transport.hpp"

namespace quotecast::broker {

// ---------------------------------------------------------------------------
// SortedSet

int SortedSet::add(double score, const std::string& member) {
    auto it = score_by_member_.find(member);
    if (it != score_by_member_.end()) {
        by_score_.erase({it->second, member});
        it->second = score;
        by_score_.insert({score, member});
        return 0;
    }
    score_by_member_.emplace(member, score);
    by_score_.insert({score, member});
    return 1;
}

namespace {

// Redis index-window semantics: negative counts from the end, window clamped.
bool resolve_window(std::int64_t start, std::int64_t stop, std::size_t size,
                    std::size_t& first, std::size_t& last) {
    const auto n = static_cast<std::int64_t>(size);
    if (start < 0) start += n;
    if (stop < 0) stop += n;
    if (start < 0) start = 0;
    if (stop >= n) stop = n - 1;
    if (n == 0 || start > stop || start >= n) return false;
    first = static_cast<std::size_t>(start);
    last = static_cast<std::size_t>(stop);
    return true;
}

}  // namespace

std::vector<std::string> SortedSet::range(std::int64_t start, std::int64_t stop) const {
    std::vector<std::string> out;
    for (auto& [score, member] : range_with_scores(start, stop)) out.push_back(member);
    return out;
}

std::vector<std::pair<double, std::string>> SortedSet::range_with_scores(
    std::int64_t start, std::int64_t stop) const {
    std::vector<std::pair<double, std::string>> out;
    std::size_t first = 0, last = 0;
    if (!resolve_window(start, stop, by_score_.size(), first, last)) return out;
    std::size_t i = 0;
    for (const auto& entry : by_score_) {
        if (i > last) break;
        if (i >= first) out.push_back(entry);
        ++i;
    }
    return out;
}

std::size_t SortedSet::remove_score_range(double min, double max) {
    if (min > max) return 0;
    auto lo = by_score_.lower_bound({min, std::string()});
    std::size_t removed = 0;
    while (lo != by_score_.end() && lo->first <= max) {
        score_by_member_.erase(lo->second);
        lo = by_score_.erase(lo);
        ++removed;
    }
    return removed;
}

std::size_t SortedSet::count_score_range(double min, double max) const {
    if (min > max) return 0;
    std::size_t count = 0;
    for (auto it = by_score_.lower_bound({min, std::string()});
         it != by_score_.end() && it->first <= max; ++it) {
        ++count;
    }
    return count;
}

std::size_t SortedSet::remove_rank_range(std::int64_t start, std::int64_t stop) {
    std::size_t first = 0, last = 0;
    if (!resolve_window(start, stop, by_score_.size(), first, last)) return 0;
    auto it = by_score_.begin();
    std::advance(it, first);
    std::size_t removed = 0;
    for (std::size_t i = first; i <= last; ++i) {
        score_by_member_.erase(it->second);
        it = by_score_.erase(it);
        ++removed;
    }
    return removed;
}

// ---------------------------------------------------------------------------
// Broker

namespace {

using resp::RespValue;

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool parse_score(const std::string& s, double& out) {
    std::string t = lower(s);
    if (t == "inf" || t == "+inf" || t == "infinity" || t == "+infinity") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    if (t == "-inf" || t == "-infinity") {
        out = -std::numeric_limits<double>::infinity();
        return true;
    }
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && !std::isnan(out);
}

bool parse_index(const std::string& s, std::int64_t& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

// Per-connection session with a bounded outbound queue drained by one writer
// thread; overflow disconnects the slow subscriber.
struct Session {
    int fd = -1;
    std::uint64_t id = 0;
    std::size_t max_outbound = 0;

    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::string> outbound;
    std::size_t outbound_bytes = 0;
    bool closing = false;

    std::unordered_set<std::string> channels;  // guarded by the broker state lock

    std::thread reader;
    std::thread writer;

    void enqueue(std::string data) {
        bool overflow = false;
        {
            std::lock_guard<std::mutex> lk(mu);
            if (closing) return;
            if (outbound_bytes + data.size() > max_outbound) {
                closing = true;
                overflow = true;
            } else {
                outbound_bytes += data.size();
                outbound.push_back(std::move(data));
            }
        }
        cv.notify_all();
        if (overflow) ::shutdown(fd, SHUT_RDWR);
    }

    void begin_close() {
        {
            std::lock_guard<std::mutex> lk(mu);
            closing = true;
        }
        cv.notify_all();
        ::shutdown(fd, SHUT_RDWR);
    }
};

}  // namespace

struct Broker::Impl {
    BrokerConfig config;

    int listen_fd = -1;
    std::uint16_t bound_port = 0;
    std::thread accept_thread;
    std::atomic<bool> stopping{false};

    std::mutex done_mu;
    std::condition_variable done_cv;
    bool stopped = false;

    // All key/channel state behind one lock: a single global mutation order.
    std::mutex state_mu;
    std::unordered_map<std::string, SortedSet> keys;
    std::unordered_map<std::string, std::vector<Session*>> channel_subs;
    std::unordered_map<std::uint64_t, std::unique_ptr<Session>> sessions;
    std::uint64_t next_session_id = 1;
    std::vector<std::unique_ptr<Session>> retired;

    void accept_loop();
    void reader_loop(Session* s);
    void writer_loop(Session* s);
    RespValue dispatch(Session* s, const std::vector<std::string>& args);
    void detach_session(Session* s);
    void reap_retired_locked();

    RespValue cmd_zadd(const std::vector<std::string>& args);
    RespValue cmd_zrange(const std::vector<std::string>& args);
    RespValue cmd_zremrangebyscore(const std::vector<std::string>& args);
    RespValue cmd_zremrangebyrank(const std::vector<std::string>& args);
    RespValue cmd_zcount(const std::vector<std::string>& args);
    RespValue cmd_zcard(const std::vector<std::string>& args);
    RespValue cmd_del(const std::vector<std::string>& args);
    RespValue cmd_publish(const std::vector<std::string>& args);
    void cmd_subscribe(Session* s, const std::vector<std::string>& args);
    void cmd_unsubscribe(Session* s, const std::vector<std::string>& args);
};

Broker::Broker(BrokerConfig config) : impl_(std::make_unique<Impl>()) {
    impl_->config = std::move(config);
}

Broker::~Broker() { stop(); }

std::uint16_t Broker::port() const { return impl_->bound_port; }

void Broker::start() {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw ConnectError("socket: " + std::string(std::strerror(errno)));
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(impl_->config.port);
    if (::inet_pton(AF_INET, impl_->config.bind_address.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw ConnectError("bad bind address: " + impl_->config.bind_address);
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        std::string err = std::strerror(errno);
        ::close(fd);
        throw ConnectError("bind " + impl_->config.bind_address + ":" +
                           std::to_string(impl_->config.port) + ": " + err);
    }
    if (::listen(fd, 128) != 0) {
        std::string err = std::strerror(errno);
        ::close(fd);
        throw ConnectError("listen: " + err);
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    impl_->bound_port = ntohs(addr.sin_port);
    impl_->listen_fd = fd;
    impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
}

void Broker::stop() {
    if (impl_->listen_fd < 0 || impl_->stopping.exchange(true)) {
        // Not started, or stop already in flight; still mark done for wait().
        std::lock_guard<std::mutex> lk(impl_->done_mu);
        impl_->stopped = true;
        impl_->done_cv.notify_all();
        return;
    }
    ::shutdown(impl_->listen_fd, SHUT_RDWR);
    if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
    ::close(impl_->listen_fd);

    std::vector<std::unique_ptr<Session>> all;
    {
        std::lock_guard<std::mutex> lk(impl_->state_mu);
        for (auto& [id, s] : impl_->sessions) {
            s->begin_close();
            all.push_back(std::move(s));
        }
        impl_->sessions.clear();
        impl_->channel_subs.clear();
        for (auto& s : impl_->retired) all.push_back(std::move(s));
        impl_->retired.clear();
    }
    for (auto& s : all) {
        if (s->reader.joinable()) s->reader.join();
        if (s->writer.joinable()) s->writer.join();
        if (s->fd >= 0) ::close(s->fd);
    }
    {
        std::lock_guard<std::mutex> lk(impl_->done_mu);
        impl_->stopped = true;
    }
    impl_->done_cv.notify_all();
}

void Broker::wait() {
    std::unique_lock<std::mutex> lk(impl_->done_mu);
    impl_->done_cv.wait(lk, [this] { return impl_->stopped; });
}

void Broker::Impl::accept_loop() {
    while (!stopping) {
        pollfd pfd{listen_fd, POLLIN, 0};
        int rc = ::poll(&pfd, 1, 200);
        if (stopping) break;
        if (rc <= 0) continue;
        int cfd = ::accept(listen_fd, nullptr, nullptr);
        if (cfd < 0) continue;
        int one = 1;
        ::setsockopt(cfd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

        auto session = std::make_unique<Session>();
        Session* s = session.get();
        s->fd = cfd;
        s->max_outbound = config.max_outbound_bytes;
        {
            std::lock_guard<std::mutex> lk(state_mu);
            reap_retired_locked();
            s->id = next_session_id++;
            sessions.emplace(s->id, std::move(session));
        }
        s->writer = std::thread([this, s] { writer_loop(s); });
        s->reader = std::thread([this, s] { reader_loop(s); });
    }
}

void Broker::Impl::writer_loop(Session* s) {
    for (;;) {
        std::string chunk;
        {
            std::unique_lock<std::mutex> lk(s->mu);
            s->cv.wait(lk, [s] { return s->closing || !s->outbound.empty(); });
            if (s->outbound.empty()) {
                if (s->closing) return;
                continue;
            }
            chunk = std::move(s->outbound.front());
            s->outbound.pop_front();
            s->outbound_bytes -= chunk.size();
        }
        const char* p = chunk.data();
        std::size_t left = chunk.size();
        while (left > 0) {
            ssize_t sent = ::send(s->fd, p, left, MSG_NOSIGNAL);
            if (sent < 0) {
                if (errno == EINTR) continue;
                s->begin_close();
                return;
            }
            p += sent;
            left -= static_cast<std::size_t>(sent);
        }
    }
}

void Broker::Impl::reader_loop(Session* s) {
    std::string inbox;
    char buf[8192];
    for (;;) {
        {
            std::lock_guard<std::mutex> lk(s->mu);
            if (s->closing) break;
        }
        pollfd pfd{s->fd, POLLIN, 0};
        int rc = ::poll(&pfd, 1, 200);
        if (rc < 0) break;
        if (rc == 0) continue;
        ssize_t got = ::recv(s->fd, buf, sizeof(buf), 0);
        if (got <= 0) break;
        inbox.append(buf, static_cast<std::size_t>(got));

        for (;;) {
            resp::DecodeProgress p = resp::decode(inbox, config.limits);
            if (p.need_more()) break;
            if (p.failed()) {
                s->enqueue(resp::encode_value(RespValue::error("ERR Protocol error: " + p.error)));
                s->begin_close();
                break;
            }
            inbox.erase(0, p.consumed);

            std::vector<std::string> args;
            bool well_formed = p.value.is_array();
            if (well_formed) {
                for (const auto& e : std::get<RespValue::Array>(p.value.node)) {
                    const auto* b = std::get_if<resp::BulkString>(&e.node);
                    if (b == nullptr) {
                        well_formed = false;
                        break;
                    }
                    args.push_back(b->bytes);
                }
            }
            if (!well_formed || args.empty()) {
                s->enqueue(resp::encode_value(
                    RespValue::error("ERR Protocol error: expected array of bulk strings")));
                s->begin_close();
                break;
            }

            const std::string name = upper(args[0]);
            if (name == "SUBSCRIBE" || name == "UNSUBSCRIBE") {
                std::lock_guard<std::mutex> lk(state_mu);
                if (name == "SUBSCRIBE") {
                    cmd_subscribe(s, args);
                } else {
                    cmd_unsubscribe(s, args);
                }
            } else {
                RespValue reply = dispatch(s, args);
                s->enqueue(resp::encode_value(reply));
                if (name == "QUIT") {
                    s->begin_close();
                    break;
                }
            }
        }
    }
    detach_session(s);
}

void Broker::Impl::detach_session(Session* s) {
    s->begin_close();
    std::lock_guard<std::mutex> lk(state_mu);
    for (const std::string& ch : s->channels) {
        auto it = channel_subs.find(ch);
        if (it == channel_subs.end()) continue;
        auto& subs = it->second;
        subs.erase(std::remove(subs.begin(), subs.end(), s), subs.end());
        if (subs.empty()) channel_subs.erase(it);
    }
    s->channels.clear();
    auto it = sessions.find(s->id);
    if (it != sessions.end()) {
        // The reader thread is `this` thread; it joins via retirement later.
        retired.push_back(std::move(it->second));
        sessions.erase(it);
    }
}

void Broker::Impl::reap_retired_locked() {
    for (auto it = retired.begin(); it != retired.end();) {
        Session* s = it->get();
        if (s->reader.get_id() == std::this_thread::get_id()) {
            ++it;
            continue;
        }
        if (s->reader.joinable()) s->reader.join();
        if (s->writer.joinable()) s->writer.join();
        if (s->fd >= 0) ::close(s->fd);
        it = retired.erase(it);
    }
}

RespValue Broker::Impl::dispatch(Session* s, const std::vector<std::string>& args) {
    const std::string name = upper(args[0]);

    {
        std::lock_guard<std::mutex> lk(state_mu);
        if (!s->channels.empty() && name != "PING" && name != "QUIT") {
            return RespValue::error(
                "ERR only (P|S)SUBSCRIBE / (P|S)UNSUBSCRIBE / PING / QUIT allowed in this "
                "context");
        }
    }

    auto wrong_args = [&name] {
        return RespValue::error("ERR wrong number of arguments for '" + lower(name) +
                                "' command");
    };

    if (name == "PING") {
        if (args.size() == 1) return RespValue::simple("PONG");
        if (args.size() == 2) return RespValue::bulk(args[1]);
        return wrong_args();
    }
    if (name == "QUIT") return RespValue::simple("OK");
    if (name == "ZADD") return args.size() == 4 ? cmd_zadd(args) : wrong_args();
    if (name == "ZRANGE") return args.size() == 4 ? cmd_zrange(args) : wrong_args();
    if (name == "ZREMRANGEBYSCORE")
        return args.size() == 4 ? cmd_zremrangebyscore(args) : wrong_args();
    if (name == "ZREMRANGEBYRANK")
        return args.size() == 4 ? cmd_zremrangebyrank(args) : wrong_args();
    if (name == "ZCOUNT") return args.size() == 4 ? cmd_zcount(args) : wrong_args();
    if (name == "ZCARD") return args.size() == 2 ? cmd_zcard(args) : wrong_args();
    if (name == "DEL") return args.size() >= 2 ? cmd_del(args) : wrong_args();
    if (name == "PUBLISH") return args.size() == 3 ? cmd_publish(args) : wrong_args();

    return RespValue::error("ERR unknown command '" + args[0] + "'");
}

RespValue Broker::Impl::cmd_zadd(const std::vector<std::string>& args) {
    double score = 0;
    if (!parse_score(args[2], score) || !std::isfinite(score)) {
        return RespValue::error("ERR value is not a valid float");
    }
    std::lock_guard<std::mutex> lk(state_mu);
    return RespValue::integer(keys[args[1]].add(score, args[3]));
}

RespValue Broker::Impl::cmd_zrange(const std::vector<std::string>& args) {
    std::int64_t start = 0, stop = 0;
    if (!parse_index(args[2], start) || !parse_index(args[3], stop)) {
        return RespValue::error("ERR value is not an integer or out of range");
    }
    std::lock_guard<std::mutex> lk(state_mu);
    RespValue::Array out;
    auto it = keys.find(args[1]);
    if (it != keys.end()) {
        for (std::string& m : it->second.range(start, stop)) {
            out.push_back(RespValue::bulk(std::move(m)));
        }
    }
    return RespValue::array(std::move(out));
}

RespValue Broker::Impl::cmd_zremrangebyscore(const std::vector<std::string>& args) {
    double min = 0, max = 0;
    if (!parse_score(args[2], min) || !parse_score(args[3], max)) {
        return RespValue::error("ERR min or max is not a float");
    }
    std::lock_guard<std::mutex> lk(state_mu);
    auto it = keys.find(args[1]);
    if (it == keys.end()) return RespValue::integer(0);
    std::size_t removed = it->second.remove_score_range(min, max);
    if (it->second.empty()) keys.erase(it);
    return RespValue::integer(static_cast<std::int64_t>(removed));
}

RespValue Broker::Impl::cmd_zremrangebyrank(const std::vector<std::string>& args) {
    std::int64_t start = 0, stop = 0;
    if (!parse_index(args[2], start) || !parse_index(args[3], stop)) {
        return RespValue::error("ERR value is not an integer or out of range");
    }
    std::lock_guard<std::mutex> lk(state_mu);
    auto it = keys.find(args[1]);
    if (it == keys.end()) return RespValue::integer(0);
    std::size_t removed = it->second.remove_rank_range(start, stop);
    if (it->second.empty()) keys.erase(it);
    return RespValue::integer(static_cast<std::int64_t>(removed));
}

RespValue Broker::Impl::cmd_zcount(const std::vector<std::string>& args) {
    double min = 0, max = 0;
    if (!parse_score(args[2], min) || !parse_score(args[3], max)) {
        return RespValue::error("ERR min or max is not a float");
    }
    std::lock_guard<std::mutex> lk(state_mu);
    auto it = keys.find(args[1]);
    if (it == keys.end()) return RespValue::integer(0);
    return RespValue::integer(static_cast<std::int64_t>(it->second.count_score_range(min, max)));
}

RespValue Broker::Impl::cmd_zcard(const std::vector<std::string>& args) {
    std::lock_guard<std::mutex> lk(state_mu);
    auto it = keys.find(args[1]);
    return RespValue::integer(it == keys.end() ? 0
                                               : static_cast<std::int64_t>(it->second.size()));
}

RespValue Broker::Impl::cmd_del(const std::vector<std::string>& args) {
    std::lock_guard<std::mutex> lk(state_mu);
    std::int64_t removed = 0;
    for (std::size_t i = 1; i < args.size(); ++i) removed += keys.erase(args[i]);
    return RespValue::integer(removed);
}

RespValue Broker::Impl::cmd_publish(const std::vector<std::string>& args) {
    // Fan-out happens under the state lock so every subscriber sees one
    // publisher's messages in publish order.
    std::lock_guard<std::mutex> lk(state_mu);
    auto it = channel_subs.find(args[1]);
    if (it == channel_subs.end()) return RespValue::integer(0);
    RespValue push = RespValue::array({RespValue::bulk("message"), RespValue::bulk(args[1]),
                                       RespValue::bulk(args[2])});
    const std::string encoded = resp::encode_value(push);
    std::int64_t receivers = 0;
    for (Session* sub : it->second) {
        sub->enqueue(encoded);
        ++receivers;
    }
    return RespValue::integer(receivers);
}

void Broker::Impl::cmd_subscribe(Session* s, const std::vector<std::string>& args) {
    if (args.size() < 2) {
        s->enqueue(resp::encode_value(
            RespValue::error("ERR wrong number of arguments for 'subscribe' command")));
        return;
    }
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& ch = args[i];
        if (s->channels.insert(ch).second) {
            auto& subs = channel_subs[ch];
            if (std::find(subs.begin(), subs.end(), s) == subs.end()) subs.push_back(s);
        }
        RespValue ack = RespValue::array(
            {RespValue::bulk("subscribe"), RespValue::bulk(ch),
             RespValue::integer(static_cast<std::int64_t>(s->channels.size()))});
        s->enqueue(resp::encode_value(ack));
    }
}

void Broker::Impl::cmd_unsubscribe(Session* s, const std::vector<std::string>& args) {
    std::vector<std::string> targets(args.begin() + 1, args.end());
    if (targets.empty()) targets.assign(s->channels.begin(), s->channels.end());
    if (targets.empty()) {
        // Redis acks a bare UNSUBSCRIBE even with no subscriptions.
        RespValue ack = RespValue::array(
            {RespValue::bulk("unsubscribe"), RespValue::null(), RespValue::integer(0)});
        s->enqueue(resp::encode_value(ack));
        return;
    }
    for (const std::string& ch : targets) {
        if (s->channels.erase(ch) > 0) {
            auto it = channel_subs.find(ch);
            if (it != channel_subs.end()) {
                auto& subs = it->second;
                subs.erase(std::remove(subs.begin(), subs.end(), s), subs.end());
                if (subs.empty()) channel_subs.erase(it);
            }
        }
        RespValue ack = RespValue::array(
            {RespValue::bulk("unsubscribe"), RespValue::bulk(ch),
             RespValue::integer(static_cast<std::int64_t>(s->channels.size()))});
        s->enqueue(resp::encode_value(ack));
    }
}

}  // namespace quotecast::broker
