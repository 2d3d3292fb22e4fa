#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "quotecast/clock.hpp"

namespace quotecast::feed {

struct SourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One observation: the five fields kept from a quote snapshot
// (time, last price, change, percent change, cumulative volume).
struct QuoteRecord {
    std::int64_t time = 0;  // UTC epoch seconds
    double close = 0;
    double change = 0;
    double pct_change = 0;  // percentage points
    double volume = 0;      // cumulative, non-negative

    bool operator==(const QuoteRecord&) const = default;
};

// One poll's snapshot across all configured symbols; all-or-nothing.
using QuoteBatch = std::map<std::string, QuoteRecord>;

// Ordered symbol list plus the designated tell symbol.
struct SymbolSet {
    std::vector<std::string> symbols;
    std::size_t tell_index = 0;

    SymbolSet() = default;
    SymbolSet(std::vector<std::string> syms, std::size_t tell);

    const std::string& tell_symbol() const { return symbols.at(tell_index); }
};

// Sequential, single-owner source of quote snapshots.
class QuoteSource {
public:
    virtual ~QuoteSource() = default;

    // One record per symbol; throws SourceError on any failure.
    virtual QuoteBatch poll(const SymbolSet& symbols, const Clock& clock) = 0;
};

struct SyntheticConfig {
    std::uint64_t seed = 0;
    double start_price = 4000.0;
    double step_fraction = 0.001;   // ε uniform in ±step_fraction
    double p_trade = 0.9;           // probability volume advances on a step
    std::int64_t session_boundary_secs = 86'400;  // session-open reset, 00:00 UTC
};

// Bounded random walk standing in for a live vendor feed. Deterministic for a
// fixed (seed, config, clock sequence). Volume is non-decreasing; change and
// pct_change reference the session-open price.
class SyntheticSource final : public QuoteSource {
public:
    explicit SyntheticSource(SyntheticConfig config = {});

    QuoteBatch poll(const SymbolSet& symbols, const Clock& clock) override;

private:
    struct SymbolState {
        double session_open = 0;
        std::int64_t session_start = -1;
        double close = 0;
        double volume = 0;
    };

    QuoteRecord step(SymbolState& st, std::int64_t now);

    SyntheticConfig config_;
    std::mt19937_64 rng_;
    std::map<std::string, SymbolState> state_;
};

// Replays a CSV fixture (header: time,close,change,pct_change,volume, with an
// optional leading symbol column for multi-symbol files). Each poll consumes
// one row per configured symbol; exhaustion is a SourceError.
class ReplaySource final : public QuoteSource {
public:
    // Rows for a single-symbol file are assigned to whichever symbol is polled.
    static std::unique_ptr<ReplaySource> from_file(const std::string& path);
    static std::unique_ptr<ReplaySource> from_string(const std::string& csv);

    QuoteBatch poll(const SymbolSet& symbols, const Clock& clock) override;

    // Rows remaining for the given symbol ("" = the unkeyed single-symbol lane).
    std::size_t remaining(const std::string& symbol = "") const;

private:
    explicit ReplaySource(std::map<std::string, std::vector<QuoteRecord>> rows);

    std::map<std::string, std::vector<QuoteRecord>> rows_;  // symbol -> queue
    std::map<std::string, std::size_t> next_;
};

// Wraps another source and fails the polls whose 1-based ordinal is listed.
class FaultInjectingSource final : public QuoteSource {
public:
    FaultInjectingSource(std::unique_ptr<QuoteSource> inner, std::set<std::size_t> fail_polls,
                         std::string message = "injected fault");

    QuoteBatch poll(const SymbolSet& symbols, const Clock& clock) override;

    std::size_t polls_seen() const { return polls_; }

private:
    std::unique_ptr<QuoteSource> inner_;
    std::set<std::size_t> fail_polls_;
    std::string message_;
    std::size_t polls_ = 0;
};

// Seam for a real vendor endpoint. The expected response body is a JSON
// object keyed by symbol:
//   {"ES=F": {"time": 1647381600, "close": 4261.75, "change": -0.25,
//             "pct_change": -0.0059, "volume": 1200000}, ...}
// Network fetch is not implemented; poll() always raises. parse_body() is the
// working half of the seam and is unit-tested.
class HttpSource final : public QuoteSource {
public:
    explicit HttpSource(std::string url) : url_(std::move(url)) {}

    QuoteBatch poll(const SymbolSet& symbols, const Clock& clock) override;

    static QuoteBatch parse_body(const std::string& json_body, const SymbolSet& symbols);

private:
    std::string url_;
};

}  // namespace quotecast::feed
