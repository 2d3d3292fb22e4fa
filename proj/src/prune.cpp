#include "quotecast/prune.hpp"

namespace quotecast::tools {

namespace {

std::int64_t as_integer(const resp::RespValue& v) {
    const auto* n = std::get_if<std::int64_t>(&v.node);
    if (n == nullptr) throw ProtocolError("expected integer reply");
    return *n;
}

std::size_t prune_symbol(ClientConnection& conn, const std::string& symbol,
                         const RetentionPolicy& policy, std::int64_t now, bool dry_run) {
    const std::int64_t total = as_integer(conn.command_ok({"ZCARD", symbol}));
    if (total == 0) return 0;

    const std::int64_t cutoff = now - policy.max_age.count();
    std::int64_t stale =
        as_integer(conn.command_ok({"ZCOUNT", symbol, "-inf", std::to_string(cutoff)}));
    // Policy floor: the newest point of a non-empty symbol always survives.
    const bool all_stale = (stale == total);
    if (all_stale) stale = total - 1;

    std::int64_t removed_age = 0;
    if (stale > 0) {
        if (dry_run) {
            removed_age = stale;
        } else if (all_stale) {
            // Rank removal keeps exactly the newest member.
            removed_age = as_integer(conn.command_ok({"ZREMRANGEBYRANK", symbol, "0", "-2"}));
        } else {
            removed_age = as_integer(
                conn.command_ok({"ZREMRANGEBYSCORE", symbol, "-inf", std::to_string(cutoff)}));
        }
    }

    std::int64_t remaining = total - removed_age;
    std::int64_t over = 0;
    if (policy.max_points > 0 && remaining > static_cast<std::int64_t>(policy.max_points)) {
        over = remaining - static_cast<std::int64_t>(policy.max_points);
        if (!dry_run) {
            over = as_integer(conn.command_ok(
                {"ZREMRANGEBYRANK", symbol, "0", std::to_string(over - 1)}));
        }
    }
    return static_cast<std::size_t>(removed_age + over);
}

}  // namespace

PruneResult prune(ClientConnection& conn, const std::vector<std::string>& symbols,
                  const RetentionPolicy& policy, std::int64_t now, bool dry_run) {
    if (!policy.valid()) throw std::invalid_argument("retention policy has no active bound");
    PruneResult result;
    for (const std::string& symbol : symbols) {
        try {
            result.removed[symbol] = prune_symbol(conn, symbol, policy, now, dry_run);
        } catch (const std::exception&) {
            result.failed.push_back(symbol);
        }
    }
    return result;
}

}  // namespace quotecast::tools
