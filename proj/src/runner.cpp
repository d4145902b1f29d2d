#include "starlat/runner.hpp"

#include "json.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace starlat {

namespace {

using ordered_json = nlohmann::ordered_json;

struct Instance {
    FieldTable k;
    AlgebraTable B;
    WorkingFamily wf;
    FamilyContext ctx;
};

// Build field, algebra, and working-family context for one (shape, q).
Instance make_instance(const Shape& s, long q,
                       const std::optional<FamilyKind>& family,
                       const Budget& budget) {
    auto pd = prime_power(q);
    if (!pd)
        throw usage_error("q = " + std::to_string(q) +
                          " is not a prime power");
    Instance inst{build_field(pd->first, pd->second, budget), {}, {}, {}};
    inst.B = build_algebra(s.canonical(), inst.k, budget);
    inst.wf = select_working_family(inst.B, family, budget);
    inst.ctx = build_context(inst.B, std::move(inst.wf.family), budget);
    return inst;
}

std::string member_label(const AlgebraTable& B, const FamilyContext& ctx,
                         int i) {
    const Subspace& S = ctx.member(i);
    std::string tag;
    if (i == ctx.idx_k)
        tag = " =k";
    else if (i == ctx.idx_B)
        tag = " =B";
    else if (contains(B.k, S, B.one))
        tag = " unital";
    return "#" + std::to_string(i) + " dim " + std::to_string(S.dim) + tag;
}

int exit_code_for_records(const std::vector<SweepRecord>& recs) {
    bool mismatch = false, skipped = false;
    for (const auto& r : recs) {
        if (!r.skipped.empty()) {
            skipped = true;
            continue;
        }
        if ((r.closed_form.has_form && !r.closed_form.match) ||
            !r.dual_match || !r.bounds_hold_hard())
            mismatch = true;
    }
    if (mismatch) return 1;
    if (skipped) return 3;
    return 0;
}

void emit_records(const RunConfig& cfg, const std::vector<SweepRecord>& recs,
                  const SeriesChecks* series, std::ostream& out) {
    if (cfg.out_format == "json")
        out << records_json(recs, series, cfg.include_timings);
    else if (cfg.out_format == "csv")
        out << records_csv(recs, cfg.include_timings);
    else
        out << records_text(recs, series);
}

EvalOptions eval_options(const RunConfig& cfg) {
    EvalOptions opt;
    opt.family = cfg.family;
    opt.cache_dir = cfg.cache_dir;
    if (opt.cache_dir.empty()) {
        if (const char* env = std::getenv("STARLAT_CACHE"))
            opt.cache_dir = env;
    }
    opt.epsilon = cfg.epsilon;
    opt.cross_check = cfg.cross_check;
    return opt;
}

Shape shape_arg(const RunConfig& cfg) {
    if (cfg.shape_text.empty())
        throw usage_error("--shape is required for " + cfg.command);
    return parse_shape(cfg.shape_text);
}

long single_q(const RunConfig& cfg) {
    if (cfg.qs.size() != 1)
        throw usage_error(cfg.command + " takes exactly one q value");
    return cfg.qs.front();
}

void require_qs(const RunConfig& cfg) {
    if (cfg.qs.empty())
        throw usage_error("--q is required for " + cfg.command);
}

// --- count / sweep ----------------------------------------------------------

int cmd_count(const RunConfig& cfg, std::ostream& out) {
    Shape s = shape_arg(cfg);
    require_qs(cfg);
    EvalOptions opt = eval_options(cfg);
    std::vector<SweepRecord> recs;
    for (long q : cfg.qs)
        recs.push_back(evaluate_cell(s, q, cfg.budget, opt));
    SeriesChecks series = check_series(recs);
    emit_records(cfg, recs, recs.size() > 1 ? &series : nullptr, out);
    return exit_code_for_records(recs);
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    Shape s = shape_arg(cfg);
    require_qs(cfg);
    auto recs = sweep(s, cfg.qs, cfg.budget, eval_options(cfg), cfg.jobs,
                      /*skip_on_budget=*/true);
    SeriesChecks series = check_series(recs);
    emit_records(cfg, recs, &series, out);
    return exit_code_for_records(recs);
}

// --- enumerate / classes / poset ---------------------------------------------

int cmd_enumerate(const RunConfig& cfg, std::ostream& out) {
    Shape s = shape_arg(cfg);
    long q = single_q(cfg);
    Instance inst = make_instance(s, q, cfg.family, cfg.budget);
    EnumerationResult R =
        enumerate_star_operations(inst.ctx, cfg.budget, cfg.cross_check);

    if (cfg.out_format == "json") {
        ordered_json j;
        j["shape"] = s.canonical().str();
        j["q"] = q;
        j["family"] = family_kind_name(inst.wf.used);
        ordered_json members = ordered_json::array();
        for (int i = 0; i < inst.ctx.m; ++i) {
            const Subspace& S = inst.ctx.member(i);
            ordered_json m;
            m["index"] = i;
            m["dim"] = S.dim;
            m["fp"] = fp_string(S.fp);
            m["unital"] = contains(inst.B.k, S, inst.B.one);
            members.push_back(std::move(m));
        }
        j["members"] = std::move(members);
        j["k"] = inst.ctx.idx_k;
        j["B"] = inst.ctx.idx_B;
        ordered_json ops = ordered_json::array();
        for (std::size_t a = 0; a < R.ops.size(); ++a) {
            ordered_json o;
            o["index"] = a;
            ordered_json closed = ordered_json::array();
            for (int i = R.ops[a].closed.first(); i >= 0;
                 i = R.ops[a].closed.next(i))
                closed.push_back(i);
            o["closed"] = std::move(closed);
            ops.push_back(std::move(o));
        }
        j["operations"] = std::move(ops);
        j["count"] = R.ops.size();
        if (R.cross_checked) j["dual_match"] = R.dual_match;
        out << j.dump(2) << "\n";
    } else {
        out << "shape " << s.canonical().str() << "  q=" << q << "  family "
            << family_kind_name(inst.wf.used) << "  m=" << inst.ctx.m
            << "\n";
        for (int i = 0; i < inst.ctx.m; ++i)
            out << "  member " << member_label(inst.B, inst.ctx, i) << "  fp "
                << fp_string(inst.ctx.member(i).fp) << "\n";
        out << R.ops.size() << " operations\n";
        for (std::size_t a = 0; a < R.ops.size(); ++a) {
            out << "  op " << a << ": fixed {";
            bool first = true;
            for (int i = R.ops[a].closed.first(); i >= 0;
                 i = R.ops[a].closed.next(i)) {
                out << (first ? "" : ",") << i;
                first = false;
            }
            out << "} (" << R.ops[a].closed.count() << " members)\n";
        }
        if (R.cross_checked)
            out << "dual route: "
                << (R.dual_match ? "match" : "MISMATCH " + R.dual_detail)
                << "\n";
    }
    return (R.cross_checked && !R.dual_match) ? 1 : 0;
}

int cmd_classes(const RunConfig& cfg, std::ostream& out) {
    Shape s = shape_arg(cfg);
    long q = single_q(cfg);
    Instance inst = make_instance(s, q, cfg.family, cfg.budget);
    ClassPoset P = compute_classes(inst.ctx);

    if (cfg.out_format == "json") {
        ordered_json j;
        j["shape"] = s.canonical().str();
        j["q"] = q;
        j["family"] = family_kind_name(inst.wf.used);
        j["count"] = P.size();
        ordered_json arr = ordered_json::array();
        for (int c = 0; c < P.size(); ++c) {
            ordered_json e;
            e["index"] = c;
            e["rep"] = P.rep[std::size_t(c)];
            ordered_json mem = ordered_json::array();
            for (std::size_t i = 0; i < P.classes[std::size_t(c)].size(); ++i)
                mem.push_back(P.classes[std::size_t(c)][i]);
            e["members"] = std::move(mem);
            ordered_json fixed = ordered_json::array();
            const DynBitset& fs = P.fixed_sets[std::size_t(c)];
            for (int i = fs.first(); i >= 0; i = fs.next(i))
                fixed.push_back(i);
            e["fixed"] = std::move(fixed);
            arr.push_back(std::move(e));
        }
        j["classes"] = std::move(arr);
        out << j.dump(2) << "\n";
    } else {
        out << "shape " << s.canonical().str() << "  q=" << q << "  family "
            << family_kind_name(inst.wf.used) << "  " << P.size()
            << " classes\n";
        for (int c = 0; c < P.size(); ++c) {
            out << "  class " << c << ": rep "
                << member_label(inst.B, inst.ctx, P.rep[std::size_t(c)])
                << ", members {";
            const auto& mem = P.classes[std::size_t(c)];
            for (std::size_t i = 0; i < mem.size(); ++i)
                out << (i ? "," : "") << mem[i];
            out << "}, |fixed| "
                << P.fixed_sets[std::size_t(c)].count() << "\n";
        }
    }
    return 0;
}

int cmd_poset(const RunConfig& cfg, std::ostream& out) {
    Shape s = shape_arg(cfg);
    long q = single_q(cfg);
    Instance inst = make_instance(s, q, cfg.family, cfg.budget);
    ClassPoset P = compute_classes(inst.ctx);
    const int nc = P.size();

    auto strictly_below = [&](int a, int b) {
        return a != b && P.leq[std::size_t(a)].test(std::size_t(b));
    };
    std::vector<std::pair<int, int>> covers;
    for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b) {
            if (!strictly_below(a, b)) continue;
            bool cover = true;
            for (int c = 0; c < nc && cover; ++c)
                if (strictly_below(a, c) && strictly_below(c, b))
                    cover = false;
            if (cover) covers.emplace_back(a, b);
        }

    if (cfg.out_format == "json") {
        ordered_json j;
        j["shape"] = s.canonical().str();
        j["q"] = q;
        j["count"] = nc;
        ordered_json edges = ordered_json::array();
        for (auto [a, b] : covers)
            edges.push_back(ordered_json::array({a, b}));
        j["covers"] = std::move(edges);
        out << j.dump(2) << "\n";
    } else {
        // dot digraph, drawn bottom-to-top like the worked example's figure
        out << "digraph classes {\n  rankdir=BT;\n"
            << "  node [shape=box, fontsize=10];\n";
        for (int c = 0; c < nc; ++c) {
            out << "  c" << c << " [label=\"class " << c << "\\nrep "
                << member_label(inst.B, inst.ctx, P.rep[std::size_t(c)])
                << "\\nsize " << P.classes[std::size_t(c)].size() << "\"];\n";
        }
        for (auto [a, b] : covers)
            out << "  c" << a << " -> c" << b << ";\n";
        out << "}\n";
    }
    return 0;
}

// --- verify ------------------------------------------------------------------

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    Shape s = shape_arg(cfg);
    require_qs(cfg);
    EvalOptions opt = eval_options(cfg);
    bool all_ok = true;
    ordered_json arr = ordered_json::array();
    for (long q : cfg.qs) {
        VerifyReport rep = verify_instance(s, q, cfg.budget, opt);
        all_ok = all_ok && rep.all_ok();
        if (cfg.out_format == "json")
            arr.push_back(ordered_json::parse(verify_json(rep)));
        else
            out << verify_text(rep);
    }
    if (cfg.out_format == "json") {
        ordered_json j;
        j["reports"] = std::move(arr);
        j["all_ok"] = all_ok;
        out << j.dump(2) << "\n";
    }
    return all_ok ? 0 : 1;
}

// --- selftest ----------------------------------------------------------------

struct SelfTest {
    std::ostream& out;
    int failures = 0;

    void check(bool ok, const std::string& label) {
        out << "  [" << (ok ? "ok" : "FAIL") << "] " << label << "\n";
        if (!ok) ++failures;
    }
};

int cmd_selftest(const RunConfig& cfg, std::ostream& out) {
    Budget budget = cfg.budget;
    EvalOptions opt; // no cache: the battery must recompute
    opt.epsilon = cfg.epsilon;
    SelfTest t{out};

    out << "exact counts\n";
    struct Known {
        const char* shape;
        long q;
        long lambda;
    };
    const Known counts[] = {
        {"1,1", 2, 1},          {"2,1", 3, 1},       {"1,2", 2, 1},
        {"1,1+1,1", 5, 1},      {"1,1+1,1+1,1", 2, 9}, {"1,1+1,1+1,1", 3, 9},
        {"1,3", 2, 3},          {"1,3", 3, 3},       {"2,1+1,1", 2, 3},
        {"1,2+1,1", 2, 5},      {"4,1", 2, 9},       {"4,1", 3, 17},
        {"1,4", 2, 42},         {"1,4", 3, 146},     {"3,1+1,1", 2, 18},
        {"3,1+1,1", 3, 34},     {"5,1", 2, 139},  {"5,1", 3, 7158},
    };
    for (const auto& kcase : counts) {
        SweepRecord r =
            evaluate_cell(parse_shape(kcase.shape), kcase.q, budget, opt);
        std::ostringstream label;
        label << "lambda(" << kcase.shape << ", q=" << kcase.q << ") = "
              << r.lambda.get_str() << " (expected " << kcase.lambda << ")";
        t.check(r.lambda == kcase.lambda, label.str());
        if (r.closed_form.has_form)
            t.check(r.closed_form.match,
                    "  closed form " + r.closed_form.name);
    }

    out << "theta\n";
    t.check(!theta_of(1, 3).has_value(), "theta sentinel at count 1");
    {
        auto th = theta_of(9, 2);
        t.check(th && std::abs(*th - 1.6645) < 1e-3,
                "theta(9, q=2) near 1.6645");
    }

    out << "conjecture fits\n";
    using S = std::vector<std::pair<long, mpz_class>>;
    PolyFit f41 = fit_poly_in_2q(S{{2, 9}, {3, 17}, {4, 33}, {5, 65}});
    t.check(f41.stable && poly_string(f41.coeffs) == "2X+1",
            "field-deg4 fit 2X+1");
    PolyFit f14 = fit_poly_in_2q(S{{2, 42}, {3, 146}, {4, 546}, {5, 2114}});
    t.check(f14.stable && poly_string(f14.coeffs) == "2X^2+2X+2",
            "nilpotent-deg4 fit 2X^2+2X+2");
    PolyFit f31 = fit_poly_in_2q(S{{2, 18}, {3, 34}, {4, 66}, {5, 130}});
    t.check(f31.stable && poly_string(f31.coeffs) == "4X+2",
            "cubic-split fit 4X+2");

    out << "verification batteries\n";
    for (const char* shape : {"1,3", "1,1+1,1+1,1", "3,1+1,1", "1,4"}) {
        VerifyReport rep =
            verify_instance(parse_shape(shape), 2, budget, opt);
        t.check(rep.all_ok(), std::string("verify ") + shape + " q=2");
    }

    out << "product embedding\n";
    {
        FieldTable k2 = build_field(2, 1, budget);
        ProductCheck pc = check_product_embedding(
            parse_shape("2,1"), parse_shape("1,1"), k2, budget, true);
        t.check(pc.holds && pc.deep_injective,
                "2,1 x 1,1 over F_2: holds, deep injective");
    }

    out << (t.failures ? "SELFTEST FAILED" : "selftest passed") << "\n";
    return t.failures ? 1 : 0;
}

} // namespace

// ---------------------------------------------------------------------------

std::vector<long> parse_q_list(const std::string& text) {
    std::vector<long> qs;
    std::string tok;
    std::istringstream in(text);
    while (std::getline(in, tok, ',')) {
        std::size_t pos = 0;
        long v = 0;
        try {
            v = std::stol(tok, &pos);
        } catch (const std::exception&) {
            throw usage_error("bad q value '" + tok + "'");
        }
        while (pos < tok.size() && std::isspace((unsigned char)tok[pos]))
            ++pos;
        if (pos != tok.size())
            throw usage_error("bad q value '" + tok + "'");
        if (v < 2) throw usage_error("q must be >= 2, got " + tok);
        qs.push_back(v);
    }
    if (qs.empty()) throw usage_error("empty q list");
    return qs;
}

std::optional<FamilyKind> parse_family_flag(const std::string& text) {
    if (text == "auto" || text.empty()) return std::nullopt;
    if (text == "f0") return FamilyKind::F0;
    if (text == "f1") return FamilyKind::F1;
    throw usage_error("--family must be f0, f1, or auto (got '" + text +
                      "')");
}

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.command == "count") return cmd_count(cfg, out);
        if (cfg.command == "sweep") return cmd_sweep(cfg, out);
        if (cfg.command == "enumerate") return cmd_enumerate(cfg, out);
        if (cfg.command == "classes") return cmd_classes(cfg, out);
        if (cfg.command == "poset") return cmd_poset(cfg, out);
        if (cfg.command == "verify") return cmd_verify(cfg, out);
        if (cfg.command == "selftest") return cmd_selftest(cfg, out);
        throw usage_error("unknown command '" + cfg.command + "'");
    } catch (const usage_error& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const budget_error& e) {
        err << "budget exhausted: " << e.what() << "\n";
        return 3;
    } catch (const mismatch_error& e) {
        err << "verification mismatch: " << e.what() << "\n";
        return 1;
    } catch (const internal_error& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace starlat
