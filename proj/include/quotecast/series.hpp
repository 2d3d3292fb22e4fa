#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quotecast/feed.hpp"

namespace quotecast::monitor {

// Timestamp-ordered, duplicate-free sequence of observations for one symbol.
class TimeSeries {
public:
    TimeSeries() = default;
    explicit TimeSeries(std::string symbol) : symbol_(std::move(symbol)) {}

    const std::string& symbol() const { return symbol_; }
    const std::vector<feed::QuoteRecord>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    // Inserts in time order. On a timestamp collision the earliest-arrived
    // point wins (keep-first); the new point is dropped.
    void append_dedup(const feed::QuoteRecord& point);
    void append_dedup(const std::vector<feed::QuoteRecord>& points);

    bool operator==(const TimeSeries&) const = default;

private:
    std::string symbol_;
    std::vector<feed::QuoteRecord> points_;
};

// Windows the series to the last n UTC calendar days that carry more than
// minobs points. Fewer than n distinct days, or no qualifying day, returns
// the input unchanged.
TimeSeries most_recent_n_days(const TimeSeries& series, std::size_t n = 2,
                              std::size_t minobs = 1500);

}  // namespace quotecast::monitor
