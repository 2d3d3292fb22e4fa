#include "quotecast/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "quotecast/numeric.hpp"

namespace quotecast::monitor {

namespace {

// Buckets the series into `width` columns and returns the row (0 = bottom)
// of each column's last close, or -1 for columns with no data.
std::vector<int> column_rows(const TimeSeries& s, std::size_t width, std::size_t height) {
    std::vector<int> rows(width, -1);
    const auto& pts = s.points();
    if (pts.empty()) return rows;

    double lo = pts[0].close, hi = pts[0].close;
    for (const auto& p : pts) {
        lo = std::min(lo, p.close);
        hi = std::max(hi, p.close);
    }
    const double span = (hi > lo) ? (hi - lo) : 1.0;

    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::size_t col = (pts.size() == 1)
                                    ? width - 1
                                    : i * (width - 1) / (pts.size() - 1);
        const double norm = (pts[i].close - lo) / span;
        int row = static_cast<int>(std::lround(norm * static_cast<double>(height - 1)));
        rows[col] = std::clamp(row, 0, static_cast<int>(height) - 1);
    }
    // Fill gaps with the previous column so the line reads continuously.
    int prev = -1;
    for (std::size_t c = 0; c < width; ++c) {
        if (rows[c] < 0) {
            rows[c] = prev;
        } else {
            prev = rows[c];
        }
    }
    return rows;
}

}  // namespace

std::string render(const std::map<std::string, TimeSeries>& series,
                   const RenderOptions& options) {
    if (options.width == 0 || options.height == 0) {
        throw std::invalid_argument("render dimensions must be positive");
    }
    const char* mark = options.ascii_only ? "*" : "•";
    const char* hline = options.ascii_only ? "-" : "─";

    std::string out;
    for (const auto& [symbol, s] : series) {
        const std::string title = symbol.empty() ? s.symbol() : symbol;
        if (s.empty()) {
            out += title + ": no data\n";
            continue;
        }
        const auto& last = s.points().back();
        out += title + "  last " + format_double(last.close) + "  chg " +
               format_double(last.change) + " (" + format_double(last.pct_change) + "%)  " +
               std::to_string(s.size()) + " obs\n";

        std::vector<int> rows = column_rows(s, options.width, options.height);
        for (int r = static_cast<int>(options.height) - 1; r >= 0; --r) {
            std::string line;
            for (std::size_t c = 0; c < options.width; ++c) {
                line += (rows[c] == r) ? mark : " ";
            }
            // Trim trailing spaces to keep output tidy.
            while (!line.empty() && line.back() == ' ') line.pop_back();
            out += line;
            out += '\n';
        }
        for (std::size_t c = 0; c < options.width; ++c) out += hline;
        out += '\n';
    }
    return out;
}

std::string to_csv(const std::map<std::string, TimeSeries>& series) {
    std::string out = "symbol,time,close,change,pct_change,volume\n";
    for (const auto& [symbol, s] : series) {
        for (const auto& p : s.points()) {
            out += symbol;
            out += ',';
            out += std::to_string(p.time);
            out += ',';
            out += format_double(p.close);
            out += ',';
            out += format_double(p.change);
            out += ',';
            out += format_double(p.pct_change);
            out += ',';
            out += format_double(p.volume);
            out += '\n';
        }
    }
    return out;
}

void export_csv(const std::map<std::string, TimeSeries>& series, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << to_csv(series);
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace quotecast::monitor
