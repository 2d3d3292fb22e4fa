#pragma once

#include <map>
#include <string>

#include "quotecast/series.hpp"

namespace quotecast::monitor {

struct RenderOptions {
    std::size_t width = 72;   // chart columns per panel
    std::size_t height = 12;  // chart rows per panel
    bool ascii_only = false;  // plain-ASCII fallback for dumb terminals
};

// One text panel per symbol: close-price line chart with the last price and
// change annotated. Deterministic for fixed input.
std::string render(const std::map<std::string, TimeSeries>& series,
                   const RenderOptions& options = {});

// Columns: symbol,time,close,change,pct_change,volume. Numeric formatting is
// canonical, so a replay source re-imports the exact series.
std::string to_csv(const std::map<std::string, TimeSeries>& series);
void export_csv(const std::map<std::string, TimeSeries>& series, const std::string& path);

}  // namespace quotecast::monitor
