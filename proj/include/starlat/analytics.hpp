#pragma once
// Exact counts and everything derived from them: the theta statistic,
// closed-form verification, bound diagnostics, conjecture-evidence fits,
// cross-q series observations, and the per-instance structural check
// battery behind the `verify` command.

#include "starlat/starops.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace starlat {

// Part of every cache key; bump when enumeration semantics change.
inline constexpr const char* kEngineVersion = "1";

// log_q(log_2 lambda). nullopt encodes -infinity (lambda = 1). Computed
// from the big integer's binary exponent, so huge counts never overflow.
std::optional<double> theta_of(const mpz_class& lambda, long q);

// ---------------------------------------------------------------------------
// Per-cell evaluation
// ---------------------------------------------------------------------------

struct EvalOptions {
    std::optional<FamilyKind> family;  // nullopt = automatic selection
    std::string cache_dir;             // empty = cache disabled
    double epsilon = 0.1;              // slack for asymptotic diagnostics
    bool cross_check = false;          // also run the dual enumeration route
};

struct BoundEntry {
    std::string name;
    double bound = 0.0;
    double observed = 0.0;
    bool holds = true;
    // True when the source statement is about a limit (liminf/limsup or
    // "for q large enough"): finite-q exceedances are advisory, not errors.
    bool asymptotic_only = false;
    std::string note;
};

struct ClosedFormInfo {
    std::string name = "none";
    bool has_form = false;
    mpz_class expected;
    bool match = true;  // vacuously true when has_form is false
};

struct SweepRecord {
    Shape shape;
    long q = 0;
    int n = 0;
    int t = 0;
    FamilyKind family_used = FamilyKind::F1;
    int family_size = 0;
    int classes = 0;
    mpz_class lambda;
    std::optional<double> theta;  // nullopt = -infinity
    ClosedFormInfo closed_form;
    std::vector<BoundEntry> bounds;
    bool cross_checked = false;
    bool dual_match = true;
    bool from_cache = false;
    double wall_ms = 0.0;
    std::string skipped;  // nonempty: cell skipped, with the reason

    bool bounds_hold_hard() const {
        for (const auto& b : bounds)
            if (!b.asymptotic_only && !b.holds) return false;
        return true;
    }
};

// Build the algebra, resolve the working family, enumerate (or read the
// cache), and attach theta, closed-form, and bound diagnostics.
SweepRecord evaluate_cell(const Shape& s, long q, const Budget& budget,
                          const EvalOptions& opt);

// Exact |Star(k, B_s)|, cache-aware.
mpz_class lambda_count(const Shape& s, long q, const Budget& budget,
                       const EvalOptions& opt = {});

// Exact-formula catalogue. n = 3 constancy is a cross-q property and lives
// in check_series instead.
ClosedFormInfo closed_form_check(const Shape& s, long q,
                                 const mpz_class& observed);

// Evaluate a q-list; with jobs > 1 the cells run on a thread pool (the
// cache is the only shared state and is write-once per key). Cells that
// exhaust the budget are recorded as skipped when skip_on_budget is set,
// otherwise the budget error propagates.
std::vector<SweepRecord> sweep(const Shape& s, const std::vector<long>& qs,
                               const Budget& budget, const EvalOptions& opt,
                               int jobs = 1, bool skip_on_budget = true);

// Cross-cell observations for one shape: constancy of the count in q when
// n = 3, and monotone growth in q when n >= 4.
struct SeriesChecks {
    std::optional<bool> n3_constant;
    std::optional<bool> nondecreasing;
    std::string detail;
};
SeriesChecks check_series(const std::vector<SweepRecord>& records);

// ---------------------------------------------------------------------------
// Conjecture evidence: lambda(q) = f(2^q) with f an integer polynomial
// ---------------------------------------------------------------------------

struct PolyFit {
    bool stable = false;            // integer coefficients + leave-one-out
    std::vector<mpz_class> coeffs;  // ascending degree; empty when unstable
    std::string detail;
};

// Exact rational interpolation of f through (2^{q_i}, lambda_i). Stable
// means the interpolant has degree <= N-2 — equivalently, every
// leave-one-out subset reproduces the same polynomial — with integer
// coefficients. Evidence only, never a proof.
PolyFit fit_poly_in_2q(const std::vector<std::pair<long, mpz_class>>& samples);

// Render ascending coefficients as "2X^2+2X+2".
std::string poly_string(const std::vector<mpz_class>& coeffs);

// ---------------------------------------------------------------------------
// Structural verification
// ---------------------------------------------------------------------------

struct CheckLine {
    std::string name;
    bool ok = false;
    std::string detail;
};

struct VerifyReport {
    Shape shape;
    long q = 0;
    std::vector<CheckLine> lines;

    bool all_ok() const {
        for (const auto& l : lines)
            if (!l.ok) return false;
        return true;
    }
};

// Full battery on one instance: family inclusion chain, dual-route
// enumeration, oracle revalidation, inner-ideal containments, the
// double-colon closure formula, the hyperplane class law and class-count
// bound, canonical-member agreement, unit translations (F_0 contexts), and
// the witness chain.
VerifyReport verify_instance(const Shape& s, long q, const Budget& budget,
                             const EvalOptions& opt = {});

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

// JSON: array of {shape, q, n, t, family, family_size, classes, lambda
// (decimal string), theta (number | null), closed_form {name, match},
// bounds [...], cross_checked, dual_match, from_cache, timings_ms} with an
// optional trailing series object. include_timings=false zeroes the timing
// fields so byte-identical reruns can be asserted.
std::string records_json(const std::vector<SweepRecord>& records,
                         const SeriesChecks* series = nullptr,
                         bool include_timings = true);
std::string records_csv(const std::vector<SweepRecord>& records,
                        bool include_timings = true);
std::string records_text(const std::vector<SweepRecord>& records,
                         const SeriesChecks* series = nullptr);
std::string verify_text(const VerifyReport& report);
std::string verify_json(const VerifyReport& report);

} // namespace starlat
