#pragma once
// Command dispatch behind the CLI binary: one entry point that maps a parsed
// configuration to a report on a stream and a process exit code.

#include "starlat/analytics.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace starlat {

struct RunConfig {
    // count | enumerate | classes | poset | verify | sweep | selftest
    std::string command;
    std::string shape_text;
    std::vector<long> qs;
    std::optional<FamilyKind> family;  // nullopt = auto
    std::string out_format = "text";   // json | csv | text
    std::string cache_dir;             // empty: fall back to $STARLAT_CACHE
    int jobs = 1;
    Budget budget;
    double epsilon = 0.1;
    bool cross_check = false;
    // Test hook: zero the timing fields so reruns are byte-identical.
    bool include_timings = true;
};

// Parse "2,3,4" into q values (validated as >= 2; primality of prime powers
// is checked downstream where q is used).
std::vector<long> parse_q_list(const std::string& text);

// Parse a --family value: "f0", "f1", or "auto".
std::optional<FamilyKind> parse_family_flag(const std::string& text);

// Execute one command. The report goes to `out`, diagnostics to `err`.
// Exit codes: 0 success, 1 verification mismatch (or engine inconsistency),
// 2 usage error, 3 budget exhaustion.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

} // namespace starlat
