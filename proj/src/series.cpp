#include "quotecast/series.hpp"

#include <algorithm>
#include <map>

namespace quotecast::monitor {

void TimeSeries::append_dedup(const feed::QuoteRecord& point) {
    auto it = std::lower_bound(points_.begin(), points_.end(), point.time,
                               [](const feed::QuoteRecord& r, std::int64_t t) {
                                   return r.time < t;
                               });
    if (it != points_.end() && it->time == point.time) return;  // keep-first
    points_.insert(it, point);
}

void TimeSeries::append_dedup(const std::vector<feed::QuoteRecord>& points) {
    for (const feed::QuoteRecord& p : points) append_dedup(p);
}

TimeSeries most_recent_n_days(const TimeSeries& series, std::size_t n, std::size_t minobs) {
    constexpr std::int64_t kSecsPerDay = 86'400;
    std::map<std::int64_t, std::size_t> per_day;  // UTC day ordinal -> count
    for (const auto& p : series.points()) per_day[p.time / kSecsPerDay]++;
    if (per_day.size() < n) return series;

    std::vector<std::int64_t> qualifying;
    for (const auto& [day, count] : per_day) {
        if (count > minobs) qualifying.push_back(day);
    }
    if (qualifying.empty()) return series;

    // Last n qualifying days; the cutoff is midnight of the earliest of them.
    const std::size_t take = std::min(n, qualifying.size());
    const std::int64_t cutoff_day = qualifying[qualifying.size() - take];
    const std::int64_t cutoff = cutoff_day * kSecsPerDay;

    TimeSeries out(series.symbol());
    for (const auto& p : series.points()) {
        if (p.time >= cutoff) out.append_dedup(p);
    }
    return out;
}

}  // namespace quotecast::monitor
