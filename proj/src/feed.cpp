#include "quotecast/feed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nlohmann/json.hpp"
#include "quotecast/numeric.hpp"

namespace quotecast::feed {

SymbolSet::SymbolSet(std::vector<std::string> syms, std::size_t tell)
    : symbols(std::move(syms)), tell_index(tell) {
    if (symbols.empty()) throw std::invalid_argument("symbol set must not be empty");
    if (tell_index >= symbols.size()) throw std::invalid_argument("tell index out of bounds");
    std::set<std::string> seen(symbols.begin(), symbols.end());
    if (seen.size() != symbols.size()) throw std::invalid_argument("symbols must be unique");
}

// ---------------------------------------------------------------------------
// SyntheticSource

SyntheticSource::SyntheticSource(SyntheticConfig config)
    : config_(config), rng_(config.seed) {}

QuoteRecord SyntheticSource::step(SymbolState& st, std::int64_t now) {
    const std::int64_t session = now - (now % config_.session_boundary_secs);
    if (st.session_start != session) {
        st.session_start = session;
        if (st.close <= 0) st.close = config_.start_price;
        st.session_open = st.close;
    }
    std::uniform_real_distribution<double> eps(-config_.step_fraction, config_.step_fraction);
    st.close *= 1.0 + eps(rng_);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng_) < config_.p_trade) {
        std::uniform_int_distribution<int> lots(1, 1000);
        st.volume += lots(rng_);
    }
    QuoteRecord r;
    r.time = now;
    r.close = st.close;
    r.change = st.close - st.session_open;
    r.pct_change = (st.session_open != 0) ? (r.change / st.session_open) * 100.0 : 0.0;
    r.volume = st.volume;
    return r;
}

QuoteBatch SyntheticSource::poll(const SymbolSet& symbols, const Clock& clock) {
    const std::int64_t now = clock.now();
    QuoteBatch batch;
    for (const std::string& sym : symbols.symbols) {
        batch.emplace(sym, step(state_[sym], now));
    }
    return batch;
}

// ---------------------------------------------------------------------------
// ReplaySource

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

QuoteRecord parse_record_fields(const std::vector<std::string>& f, std::size_t off,
                                std::size_t line_no) {
    auto bad = [line_no](const char* what) {
        return SourceError("replay row " + std::to_string(line_no) + ": " + what);
    };
    auto t = parse_int64(f[off]);
    auto close = parse_double(f[off + 1]);
    auto change = parse_double(f[off + 2]);
    auto pct = parse_double(f[off + 3]);
    auto vol = parse_double(f[off + 4]);
    if (!t) throw bad("bad time");
    if (!close || !change || !pct || !vol) throw bad("bad numeric field");
    return QuoteRecord{*t, *close, *change, *pct, *vol};
}

}  // namespace

ReplaySource::ReplaySource(std::map<std::string, std::vector<QuoteRecord>> rows)
    : rows_(std::move(rows)) {}

std::unique_ptr<ReplaySource> ReplaySource::from_string(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw SourceError("replay data is empty");
    line = strip_cr(line);

    bool keyed = false;
    if (line == "symbol,time,close,change,pct_change,volume") {
        keyed = true;
    } else if (line != "time,close,change,pct_change,volume") {
        throw SourceError("replay header must be [symbol,]time,close,change,pct_change,volume");
    }

    std::map<std::string, std::vector<QuoteRecord>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        auto f = split(line, ',');
        const std::size_t expected = keyed ? 6u : 5u;
        if (f.size() != expected) {
            throw SourceError("replay row " + std::to_string(line_no) + ": expected " +
                              std::to_string(expected) + " fields, got " +
                              std::to_string(f.size()));
        }
        const std::string key = keyed ? f[0] : std::string();
        rows[key].push_back(parse_record_fields(f, keyed ? 1 : 0, line_no));
    }
    return std::unique_ptr<ReplaySource>(new ReplaySource(std::move(rows)));
}

std::unique_ptr<ReplaySource> ReplaySource::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SourceError("cannot open replay file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

QuoteBatch ReplaySource::poll(const SymbolSet& symbols, const Clock&) {
    const bool keyed = !rows_.count("");
    if (!keyed && symbols.symbols.size() > 1) {
        throw SourceError("replay file without a symbol column supports a single symbol");
    }
    // All-or-nothing: verify every symbol has a row left before consuming any.
    for (const std::string& sym : symbols.symbols) {
        const std::string key = keyed ? sym : std::string();
        auto it = rows_.find(key);
        std::size_t used = next_.count(key) ? next_.at(key) : 0;
        if (it == rows_.end() || used >= it->second.size()) {
            throw SourceError("replay exhausted for symbol " + sym);
        }
    }
    QuoteBatch batch;
    for (const std::string& sym : symbols.symbols) {
        const std::string key = keyed ? sym : std::string();
        batch.emplace(sym, rows_.at(key)[next_[key]++]);
    }
    return batch;
}

std::size_t ReplaySource::remaining(const std::string& symbol) const {
    auto it = rows_.find(symbol);
    if (it == rows_.end()) return 0;
    std::size_t used = next_.count(symbol) ? next_.at(symbol) : 0;
    return it->second.size() - used;
}

// ---------------------------------------------------------------------------
// FaultInjectingSource

FaultInjectingSource::FaultInjectingSource(std::unique_ptr<QuoteSource> inner,
                                           std::set<std::size_t> fail_polls,
                                           std::string message)
    : inner_(std::move(inner)), fail_polls_(std::move(fail_polls)),
      message_(std::move(message)) {}

QuoteBatch FaultInjectingSource::poll(const SymbolSet& symbols, const Clock& clock) {
    ++polls_;
    if (fail_polls_.count(polls_)) throw SourceError(message_);
    return inner_->poll(symbols, clock);
}

// ---------------------------------------------------------------------------
// HttpSource

QuoteBatch HttpSource::poll(const SymbolSet&, const Clock&) {
    throw SourceError("http source is a disabled stub (configured url: " + url_ + ")");
}

QuoteBatch HttpSource::parse_body(const std::string& json_body, const SymbolSet& symbols) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_body);
    } catch (const nlohmann::json::exception& e) {
        throw SourceError(std::string("http body is not valid json: ") + e.what());
    }
    QuoteBatch batch;
    for (const std::string& sym : symbols.symbols) {
        if (!j.contains(sym)) throw SourceError("http body missing symbol " + sym);
        const auto& q = j.at(sym);
        try {
            QuoteRecord r;
            r.time = q.at("time").get<std::int64_t>();
            r.close = q.at("close").get<double>();
            r.change = q.at("change").get<double>();
            r.pct_change = q.at("pct_change").get<double>();
            r.volume = q.at("volume").get<double>();
            batch.emplace(sym, r);
        } catch (const nlohmann::json::exception& e) {
            throw SourceError("http body field error for " + sym + ": " + e.what());
        }
    }
    return batch;
}

}  // namespace quotecast::feed
