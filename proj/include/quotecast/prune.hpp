#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "quotecast/client.hpp"

namespace quotecast::tools {

// Age and count caps on each symbol's sorted set. At least one bound must be
// active; max_points 0 means unlimited.
struct RetentionPolicy {
    std::chrono::seconds max_age{std::chrono::hours(24) * 30};
    std::size_t max_points = 200'000;

    bool valid() const { return max_age.count() > 0 || max_points > 0; }
};

struct PruneResult {
    std::map<std::string, std::size_t> removed;   // per-symbol removed counts
    std::vector<std::string> failed;               // symbols that errored
};

// Removes points older than now - max_age, then trims to max_points by rank.
// The newest point of a non-empty symbol always survives. Idempotent; with
// dry_run, counts are reported but nothing is mutated.
PruneResult prune(ClientConnection& conn, const std::vector<std::string>& symbols,
                  const RetentionPolicy& policy, std::int64_t now, bool dry_run = false);

}  // namespace quotecast::tools
