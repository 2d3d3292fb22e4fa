#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "quotecast/clock.hpp"
#include "quotecast/resp.hpp"

namespace quotecast::broker {

// Unique members ordered by (score, member bytes). Re-adding a member
// replaces its score.
class SortedSet {
public:
    // Returns 1 if the member was new, 0 if its score was updated.
    int add(double score, const std::string& member);

    // Members within the inclusive index window; negative indices count
    // back from the end, Redis-style.
    std::vector<std::string> range(std::int64_t start, std::int64_t stop) const;

    // Same window, as (score, member) pairs.
    std::vector<std::pair<double, std::string>> range_with_scores(std::int64_t start,
                                                                  std::int64_t stop) const;

    std::size_t count_score_range(double min, double max) const;

    std::size_t remove_score_range(double min, double max);

    // Removes the inclusive rank window; negative ranks count from the end.
    std::size_t remove_rank_range(std::int64_t start, std::int64_t stop);

    std::size_t size() const { return by_score_.size(); }
    bool empty() const { return by_score_.empty(); }

private:
    std::map<std::string, double> score_by_member_;
    std::set<std::pair<double, std::string>> by_score_;
};

struct BrokerConfig {
    std::string bind_address = "127.0.0.1";
    std::uint16_t port = 6379;  // 0 = pick an ephemeral port
    std::size_t max_outbound_bytes = 8 * 1024 * 1024;
    resp::DecodeLimits limits;
};

// Minimal RESP2 server: sorted-set commands plus pub/sub, enough to run the
// full capture/monitor pipeline without an external Redis.
class Broker {
public:
    explicit Broker(BrokerConfig config = {});
    ~Broker();

    Broker(const Broker&) = delete;
    Broker& operator=(const Broker&) = delete;

    // Binds and starts accepting. Throws ConnectError on bind failure.
    void start();

    // Requests shutdown, closes every connection, joins all threads.
    void stop();

    // Blocks until stop() is called from another thread.
    void wait();

    std::uint16_t port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace quotecast::broker
