#include "starlat/starops.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace starlat {

namespace {

std::string member_str(const FamilyContext& ctx, int i) {
    if (i < 0) return "<none>";
    const Subspace& S = ctx.member(i);
    return "#" + std::to_string(i) + " (dim " + std::to_string(S.dim) + ", fp " +
           fp_string(S.fp) + ")";
}

} // namespace

FamilyContext build_context(const AlgebraTable& B, SubspaceFamily G,
                            const Budget& budget) {
    FamilyContext ctx;
    ctx.B = &B;
    ctx.G = std::move(G);
    ctx.m = ctx.G.size();
    if (ctx.m == 0) throw internal_error("build_context: empty family");

    ctx.idx_k = ctx.G.find(span(B, {B.one}).fp);
    ctx.idx_B = ctx.G.find(full_subspace(B.k, B.n).fp);
    if (ctx.idx_k < 0 || ctx.idx_B < 0)
        throw internal_error("build_context: the family must contain k and B");

    ctx.num_elements = B.element_count_u64(budget);

    const int m = ctx.m;
    ctx.above.assign(m, DynBitset(m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (subspace_leq(B.k, ctx.member(i), ctx.member(j))) ctx.above[i].set(j);

    std::vector<Vec> elems;
    elems.reserve(ctx.num_elements);
    for (std::uint64_t idx = 0; idx < ctx.num_elements; ++idx)
        elems.push_back(B.element(idx));

    ctx.colon_idx.assign(m, std::vector<int>(ctx.num_elements, -1));
    ctx.colon_targets.assign(m, DynBitset(m));
    for (int i = 0; i < m; ++i) {
        std::vector<Vec> funs = nullspace_of(B.k, ctx.member(i));
        for (std::uint64_t b = 0; b < ctx.num_elements; ++b) {
            Subspace S = colon_element_pre(B, funs, elems[b]);
            int j = ctx.G.find(S.fp);
            ctx.colon_idx[i][b] = j;
            if (j >= 0) ctx.colon_targets[i].set(j);
        }
    }

    ctx.pii.assign(m, std::vector<int>(m, -1));
    for (int i = 0; i < m; ++i) {
        ctx.pii[i][i] = i;
        for (int j = i + 1; j < m; ++j) {
            Subspace S = intersect(B.k, ctx.member(i), ctx.member(j));
            int idx = ctx.G.find(S.fp);
            ctx.pii[i][j] = ctx.pii[j][i] = idx;
        }
    }
    return ctx;
}

std::optional<AxiomViolation> is_valid_multiplicative(const FamilyContext& ctx,
                                                      const StarOperation& op) {
    if (op.ctx != &ctx)
        throw internal_error("oracle: operation bound to a different context");
    if (int(op.closure_map.size()) != ctx.m || op.closed.size() != std::size_t(ctx.m))
        throw internal_error("oracle: malformed operation tables");
    for (int x = 0; x < ctx.m; ++x) {
        int y = op.closure_map[x];
        if (y < 0 || y >= ctx.m)
            throw internal_error("oracle: closure map out of range at member " +
                                 std::to_string(x));
        if (op.closed.test(x) != (y == x))
            throw internal_error("oracle: closed set disagrees with the map at " +
                                 member_str(ctx, x));
    }

    const auto& map = op.closure_map;

    if (map[ctx.idx_k] != ctx.idx_k)
        return AxiomViolation{"star", ctx.idx_k, map[ctx.idx_k], std::uint64_t(-1),
                              "closure moves k to " + member_str(ctx, map[ctx.idx_k])};

    for (int x = 0; x < ctx.m; ++x)
        if (!ctx.above[x].test(map[x]))
            return AxiomViolation{"extensive", x, map[x], std::uint64_t(-1),
                                  member_str(ctx, x) + " is not contained in its closure " +
                                      member_str(ctx, map[x])};

    for (int x = 0; x < ctx.m; ++x)
        if (map[map[x]] != map[x])
            return AxiomViolation{"idempotent", x, map[x], std::uint64_t(-1),
                                  "closure of " + member_str(ctx, x) + " is " +
                                      member_str(ctx, map[x]) + ", which closes further to " +
                                      member_str(ctx, map[map[x]])};

    for (int x = 0; x < ctx.m; ++x)
        for (int y = ctx.above[x].first(); y >= 0; y = ctx.above[x].next(y))
            if (!ctx.above[map[x]].test(map[y]))
                return AxiomViolation{"monotone", x, y, std::uint64_t(-1),
                                      member_str(ctx, x) + " lies in " + member_str(ctx, y) +
                                          " but their closures are not nested"};

    for (int x = 0; x < ctx.m; ++x) {
        for (std::uint64_t b = 0; b < ctx.num_elements; ++b) {
            int jj = ctx.colon_idx[x][b];
            if (jj < 0) continue;
            int tgt = ctx.colon_idx[map[x]][b];
            if (tgt < 0)
                throw internal_error("oracle: family is not upward closed under colon at " +
                                     member_str(ctx, map[x]) + " : " +
                                     vec_str(ctx.B->element(b)));
            if (!ctx.above[map[jj]].test(tgt))
                return AxiomViolation{"multiplicative", x, jj, b,
                                      "(I:b)^* = " + member_str(ctx, map[jj]) +
                                          " is not contained in (I^*:b) = " +
                                          member_str(ctx, tgt) + " for I = " +
                                          member_str(ctx, x) + ", b = " +
                                          vec_str(ctx.B->element(b))};
        }
    }
    return std::nullopt;
}

std::optional<StarOperation> try_op_from_closed(const FamilyContext& ctx,
                                                const DynBitset& closed) {
    if (closed.size() != std::size_t(ctx.m))
        throw internal_error("op_from_closed: bitset size mismatch");
    if (!closed.test(ctx.idx_B)) return std::nullopt;

    StarOperation op;
    op.ctx = &ctx;
    op.closed = closed;
    op.closure_map.assign(ctx.m, -1);
    for (int x = 0; x < ctx.m; ++x) {
        if (closed.test(x)) {
            op.closure_map[x] = x;
            continue;
        }
        int y0 = -1;
        for (int y = closed.first(); y >= 0; y = closed.next(y))
            if (ctx.above[x].test(y) && (y0 < 0 || ctx.above[y].test(y0))) y0 = y;
        if (y0 < 0) return std::nullopt;
        // y0 must be the minimum, i.e. inside every closed superset of x.
        for (int y = closed.first(); y >= 0; y = closed.next(y))
            if (ctx.above[x].test(y) && !ctx.above[y0].test(y)) return std::nullopt;
        op.closure_map[x] = y0;
    }
    return op;
}

StarOperation op_from_closed(const FamilyContext& ctx, const DynBitset& closed) {
    auto op = try_op_from_closed(ctx, closed);
    if (!op)
        throw internal_error(
            "op_from_closed: some member has no unique minimal closed superset");
    return std::move(*op);
}

StarOperation principal_closure(const FamilyContext& ctx, int i) {
    if (i < 0 || i >= ctx.m)
        throw internal_error("principal_closure: member index out of range");
    DynBitset inset(ctx.m);
    std::vector<int> work;
    std::deque<int> pending;
    auto push = [&](int x) {
        if (x >= 0 && !inset.test(std::size_t(x))) {
            inset.set(std::size_t(x));
            work.push_back(x);
            pending.push_back(x);
        }
    };
    push(ctx.idx_k);
    push(ctx.idx_B);
    push(i);
    while (!pending.empty()) {
        int x = pending.front();
        pending.pop_front();
        const DynBitset& tg = ctx.colon_targets[x];
        for (int y = tg.first(); y >= 0; y = tg.next(y)) push(y);
        // Pair x with everything inserted so far; pairs formed later are
        // handled when their later element is popped.
        for (std::size_t wi = 0; wi < work.size(); ++wi) push(ctx.pii[x][work[wi]]);
    }
    return op_from_closed(ctx, inset);
}

StarOperation meet(const StarOperation& a, const StarOperation& b) {
    if (!a.ctx || a.ctx != b.ctx)
        throw internal_error("meet: operations from different contexts");
    const FamilyContext& ctx = *a.ctx;
    StarOperation out;
    out.ctx = &ctx;
    out.closure_map.assign(ctx.m, -1);
    out.closed = DynBitset(ctx.m);
    for (int x = 0; x < ctx.m; ++x) {
        int d = ctx.pii[a.closure_map[x]][b.closure_map[x]];
        // The intersection contains member x, and the family is upward
        // closed, so it must be a member.
        if (d < 0)
            throw internal_error("meet: closure intersection left the family at " +
                                 member_str(ctx, x));
        out.closure_map[x] = d;
        if (d == x) out.closed.set(std::size_t(x));
    }
    return out;
}

StarOperation meet_list(const FamilyContext& ctx, const std::vector<int>& members) {
    StarOperation acc = principal_closure(ctx, ctx.idx_B);
    for (int x : members) acc = meet(acc, principal_closure(ctx, x));
    return acc;
}

ClassPoset compute_classes(const FamilyContext& ctx) {
    ClassPoset P;
    P.class_of.assign(ctx.m, -1);
    std::unordered_map<DynBitset, int, DynBitsetHash> by_fixed;
    for (int i = 0; i < ctx.m; ++i) {
        if (i == ctx.idx_B) continue;
        StarOperation op = principal_closure(ctx, i);
        auto [it, fresh] = by_fixed.try_emplace(op.closed, P.size());
        if (fresh) {
            P.classes.emplace_back();
            P.rep.push_back(i);
            P.fixed_sets.push_back(op.closed);
        }
        P.classes[std::size_t(it->second)].push_back(i);
        P.class_of[i] = it->second;
    }
    const int nc = P.size();
    P.leq.assign(nc, DynBitset(nc));
    for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b)
            if (P.fixed_sets[a].subset_of(P.fixed_sets[b])) P.leq[a].set(std::size_t(b));
    P.class_of_k = (ctx.idx_k == ctx.idx_B) ? -1 : P.class_of[ctx.idx_k];
    return P;
}

namespace {

// BFS over downsets of the class poset; calls fn on every downset.
template <typename Fn>
void for_each_downset(const ClassPoset& P, const Budget& budget, Fn&& fn) {
    const int nc = P.size();
    DynBitset D0{std::size_t(nc)};
    if (P.class_of_k >= 0) D0.set(std::size_t(P.class_of_k));
    std::unordered_set<DynBitset, DynBitsetHash> seen;
    std::deque<DynBitset> queue;
    seen.insert(D0);
    queue.push_back(D0);
    while (!queue.empty()) {
        DynBitset D = std::move(queue.front());
        queue.pop_front();
        fn(D);
        for (int c = 0; c < nc; ++c) {
            if (D.test(std::size_t(c))) continue;
            bool ok = true;
            for (int x = 0; x < nc; ++x)
                if (x != c && P.leq[x].test(std::size_t(c)) && !D.test(std::size_t(x))) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            DynBitset D2 = D;
            D2.set(std::size_t(c));
            if (seen.insert(D2).second) {
                if (seen.size() > budget.max_candidates)
                    throw budget_error("enumerate: downset count exceeds the candidate cap of " +
                                       std::to_string(budget.max_candidates));
                queue.push_back(std::move(D2));
            }
        }
    }
}

} // namespace

EnumerationResult enumerate_star_operations(const FamilyContext& ctx,
                                            const Budget& budget, bool cross_check) {
    EnumerationResult R;
    R.poset = compute_classes(ctx);
    const int nc = R.poset.size();
    if (nc > budget.max_classes)
        throw budget_error("enumerate: " + std::to_string(nc) +
                           " equivalence classes exceed the cap of " +
                           std::to_string(budget.max_classes) +
                           "; raise the class budget to proceed");

    std::vector<StarOperation> reps;
    reps.reserve(nc);
    for (int c = 0; c < nc; ++c) reps.push_back(op_from_closed(ctx, R.poset.fixed_sets[c]));

    std::unordered_map<DynBitset, int, DynBitsetHash> seen;
    std::deque<int> frontier;
    auto add = [&](StarOperation op) {
        auto it = seen.find(op.closed);
        if (it != seen.end()) return;
        if (auto v = is_valid_multiplicative(ctx, op))
            throw internal_error("enumerate: generated operation violates the " + v->axiom +
                                 " axiom: " + v->detail);
        if (seen.size() >= budget.max_candidates)
            throw budget_error("enumerate: operation count exceeds the candidate cap of " +
                               std::to_string(budget.max_candidates));
        seen.emplace(op.closed, int(R.ops.size()));
        frontier.push_back(int(R.ops.size()));
        R.ops.push_back(std::move(op));
    };

    add(principal_closure(ctx, ctx.idx_B));
    while (!frontier.empty()) {
        int at = frontier.front();
        frontier.pop_front();
        for (int c = 0; c < nc; ++c) add(meet(R.ops[std::size_t(at)], reps[std::size_t(c)]));
    }

    std::sort(R.ops.begin(), R.ops.end(), [](const StarOperation& a, const StarOperation& b) {
        std::size_t ca = a.closed.count(), cb = b.closed.count();
        if (ca != cb) return ca < cb;
        return a.closed < b.closed;
    });

    if (cross_check) {
        R.cross_checked = true;
        std::unordered_set<DynBitset, DynBitsetHash> primary;
        for (const auto& op : R.ops) primary.insert(op.closed);

        std::unordered_set<DynBitset, DynBitsetHash> dual;
        for_each_downset(R.poset, budget, [&](const DynBitset& D) {
            DynBitset closed(std::size_t(ctx.m));
            closed.set(std::size_t(ctx.idx_B));
            for (int c = D.first(); c >= 0; c = D.next(c))
                for (int x : R.poset.classes[std::size_t(c)]) closed.set(std::size_t(x));
            auto op = try_op_from_closed(ctx, closed);
            if (op && !is_valid_multiplicative(ctx, *op)) dual.insert(closed);
        });

        R.dual_match = (primary.size() == dual.size());
        if (R.dual_match)
            for (const auto& fp : dual)
                if (!primary.count(fp)) {
                    R.dual_match = false;
                    break;
                }
        if (!R.dual_match) {
            std::string ex;
            for (const auto& fp : primary)
                if (!dual.count(fp)) {
                    ex = "; example closed set only in the meet route: size " +
                         std::to_string(fp.count());
                    break;
                }
            if (ex.empty())
                for (const auto& fp : dual)
                    if (!primary.count(fp)) {
                        ex = "; example closed set only in the downset route: size " +
                             std::to_string(fp.count());
                        break;
                    }
            R.dual_detail = "meet route found " + std::to_string(primary.size()) +
                            " operations, downset route " + std::to_string(dual.size()) + ex;
        }
    }
    return R;
}

bool is_canonical(const AlgebraTable& B, const Subspace& I) {
    if (!contains(B.k, I, B.one)) return false;
    if (I.dim != B.n - 1) return false;
    return largest_inner_ideal(B, I).dim == 0;
}

WorkingFamily select_working_family(const AlgebraTable& B,
                                    std::optional<FamilyKind> request,
                                    const Budget& budget) {
    WorkingFamily out;
    SubspaceFamily f0 = enumerate_family(B, FamilyKind::F0, budget);
    SubspaceFamily freg = enumerate_family(B, FamilyKind::Freg, budget);
    out.f0_size = f0.size();
    // F_reg is always a subset of F_0, so equal sizes mean equal families.
    out.f0_equals_freg = (f0.size() == freg.size());

    FamilyKind want = FamilyKind::F0;
    if (!request) {
        want = out.f0_equals_freg ? FamilyKind::F1 : FamilyKind::F0;
    } else if (*request == FamilyKind::F0) {
        want = FamilyKind::F0;
    } else if (*request == FamilyKind::F1) {
        if (!out.f0_equals_freg)
            throw mismatch_error(
                "family f1 requires every member of F_0 to contain a unit, but here |F_0| = " +
                std::to_string(f0.size()) + " and |F_reg| = " + std::to_string(freg.size()) +
                "; rerun with family f0");
        want = FamilyKind::F1;
    } else {
        throw usage_error(std::string("family ") + family_kind_name(*request) +
                          " cannot serve as a working family; choose f0, f1, or auto");
    }
    out.used = want;
    out.family = (want == FamilyKind::F0) ? std::move(f0)
                                          : enumerate_family(B, FamilyKind::F1, budget);
    return out;
}

WitnessFamily check_independent_family(const FamilyContext& ctx,
                                       const std::vector<int>& members) {
    WitnessFamily out;
    out.members = members;
    const int s = int(members.size());
    out.images.assign(s, -1);
    out.certificates.assign(s, Vec{});

    std::vector<StarOperation> P;
    P.reserve(s);
    for (int x : members) P.push_back(principal_closure(ctx, x));
    StarOperation triv = principal_closure(ctx, ctx.idx_B);

    for (int a = 0; a < s; ++a) {
        StarOperation others = triv;
        for (int b = 0; b < s; ++b)
            if (b != a) others = meet(others, P[std::size_t(b)]);
        int img = others.closure_map[std::size_t(members[std::size_t(a)])];
        out.images[std::size_t(a)] = img;
        if (img == members[std::size_t(a)]) {
            out.independent = false;
            out.failed_member = a;
            return out;
        }
        const Subspace& M = ctx.member(members[std::size_t(a)]);
        for (const Vec& r : ctx.member(img).rows)
            if (!contains(ctx.B->k, M, r)) {
                out.certificates[std::size_t(a)] = r;
                break;
            }
        if (out.certificates[std::size_t(a)].empty())
            throw internal_error(
                "independent family: strict closure without an escaping basis row");
    }
    out.independent = true;
    return out;
}

WitnessFamily build_witness_family(const FamilyContext& ctx, WitnessMode mode,
                                   const ClassPoset& poset) {
    const AlgebraTable& B = *ctx.B;
    const int t = B.shape.t();

    std::vector<int> cand;
    DynBitset taken(std::size_t(std::max(poset.size(), 1)));
    Vec xf;
    bool filter_xf = false;

    auto consider = [&](const Vec& alpha) {
        Subspace I = span(B, {B.one, alpha});
        if (I.dim != 2) return; // alpha on the line of 1
        if (filter_xf && contains(B.k, I, xf)) return;
        int idx = ctx.G.find(I.fp);
        if (idx < 0)
            throw internal_error("witness: <1,alpha> is not in the working family, alpha = " +
                                 vec_str(alpha));
        int c = poset.class_of[std::size_t(idx)];
        if (c < 0 || taken.test(std::size_t(c))) return;
        taken.set(std::size_t(c));
        cand.push_back(idx);
    };

    if (mode == WitnessMode::Local) {
        if (t != 1) throw usage_error("local witness mode requires a single component");
        int e = B.shape.pairs[0].first, f = B.shape.pairs[0].second;
        if (f >= 2) {
            filter_xf = true;
            xf.assign(std::size_t(B.n), 0);
            xf[std::size_t((f - 1) * e)] = 1;
        }
        for (std::uint64_t idx = 0; idx < ctx.num_elements; ++idx) {
            Vec a = B.element(idx);
            if (B.is_zero(a)) continue;
            consider(a);
        }
    } else {
        if (t < 2) throw usage_error("split witness mode requires at least two components");
        const int off = B.comp_offset[std::size_t(t - 1)];
        const int wlast =
            B.shape.pairs[std::size_t(t - 1)].first * B.shape.pairs[std::size_t(t - 1)].second;
        Vec onep = B.one;
        for (int j = 0; j < wlast; ++j) onep[std::size_t(off + j)] = 0;

        for (std::uint64_t idx = 0; idx < ctx.num_elements; ++idx) {
            Vec a = B.element(idx);
            bool last_zero = true;
            for (int j = 0; j < wlast && last_zero; ++j)
                if (a[std::size_t(off + j)] != 0) last_zero = false;
            if (!last_zero) continue;
            bool unit_rest = true;
            for (int i = 0; i + 1 < t && unit_rest; ++i) {
                int e_i = B.shape.pairs[std::size_t(i)].first;
                bool nz = false;
                for (int j = 0; j < e_i && !nz; ++j)
                    if (a[std::size_t(B.comp_offset[std::size_t(i)] + j)] != 0) nz = true;
                unit_rest = nz;
            }
            if (!unit_rest) continue;
            bool on_line = false;
            for (int c = 1; c < B.q() && !on_line; ++c)
                if (a == B.smul(felem(c), onep)) on_line = true;
            if (on_line) continue;
            consider(a);
        }
    }

    int pruned = 0;
    WitnessFamily wf = check_independent_family(ctx, cand);
    while (!wf.independent && !wf.members.empty()) {
        std::vector<int> rest = wf.members;
        rest.erase(rest.begin() + wf.failed_member);
        ++pruned;
        wf = check_independent_family(ctx, rest);
    }
    wf.pruned = pruned;
    return wf;
}

bool verify_unit_translation(const FamilyContext& ctx,
                             const std::vector<StarOperation>& ops, std::string* detail) {
    const AlgebraTable& B = *ctx.B;
    if (ctx.G.kind == FamilyKind::F1)
        throw usage_error(
            "unit translation is not an invariant of the 1-containing family; use f0");
    auto fail = [&](std::string msg) {
        if (detail) *detail = std::move(msg);
        return false;
    };
    for (std::uint64_t idx = 0; idx < ctx.num_elements; ++idx) {
        Vec u = B.element(idx);
        if (!B.is_unit(u)) continue;
        std::vector<int> tr(std::size_t(ctx.m), -1);
        for (int i = 0; i < ctx.m; ++i) {
            std::vector<Vec> rows;
            rows.reserve(ctx.member(i).rows.size());
            for (const Vec& r : ctx.member(i).rows) rows.push_back(B.mul(u, r));
            int j = ctx.G.find(span(B, rows).fp);
            if (j < 0)
                return fail("family is not stable under multiplication by the unit " +
                            vec_str(u) + " at member " + member_str(ctx, i));
            tr[std::size_t(i)] = j;
        }
        for (const auto& op : ops)
            for (int i = 0; i < ctx.m; ++i)
                if (op.closure_map[std::size_t(tr[std::size_t(i)])] !=
                    tr[std::size_t(op.closure_map[std::size_t(i)])])
                    return fail("closure does not commute with the unit " + vec_str(u) +
                                " at member " + member_str(ctx, i));
    }
    return true;
}

ProductCheck check_product_embedding(const Shape& s1, const Shape& s2,
                                     const FieldTable& k, const Budget& budget,
                                     bool deep) {
    ProductCheck out;
    Shape s12;
    s12.pairs = s1.pairs;
    s12.pairs.insert(s12.pairs.end(), s2.pairs.begin(), s2.pairs.end());

    AlgebraTable B1 = build_algebra(s1, k, budget);
    AlgebraTable B2 = build_algebra(s2, k, budget);
    AlgebraTable B12 = build_algebra(s12, k, budget);

    auto family_for = [&](const AlgebraTable& B) {
        if (deep) return enumerate_family(B, FamilyKind::F0, budget);
        return select_working_family(B, std::nullopt, budget).family;
    };

    FamilyContext ctx1 = build_context(B1, family_for(B1), budget);
    FamilyContext ctx2 = build_context(B2, family_for(B2), budget);
    FamilyContext ctx12 = build_context(B12, family_for(B12), budget);

    EnumerationResult r1 = enumerate_star_operations(ctx1, budget);
    EnumerationResult r2 = enumerate_star_operations(ctx2, budget);
    EnumerationResult r12 = enumerate_star_operations(ctx12, budget);

    out.lambda1 = mpz_class(static_cast<unsigned long>(r1.ops.size()));
    out.lambda2 = mpz_class(static_cast<unsigned long>(r2.ops.size()));
    out.lambda12 = mpz_class(static_cast<unsigned long>(r12.ops.size()));
    out.holds = (out.lambda12 >= out.lambda1 * out.lambda2);
    if (!deep) return out;
    out.deep_ran = true;

    const int n1 = B1.n, n2 = B2.n, n = B12.n;
    auto lift_index = [&](const Subspace& I, bool first_factor) {
        std::vector<Vec> rows;
        for (const Vec& r : I.rows) {
            Vec v(std::size_t(n), 0);
            for (int j = 0; j < (first_factor ? n1 : n2); ++j)
                v[std::size_t(first_factor ? j : n1 + j)] = r[std::size_t(j)];
            rows.push_back(std::move(v));
        }
        int other_off = first_factor ? n1 : 0;
        int other_len = first_factor ? n2 : n1;
        for (int j = 0; j < other_len; ++j) {
            Vec v(std::size_t(n), 0);
            v[std::size_t(other_off + j)] = 1;
            rows.push_back(std::move(v));
        }
        int idx = ctx12.G.find(span(B12, rows).fp);
        if (idx < 0)
            throw internal_error("product: lifted member is missing from the product family");
        return idx;
    };
    std::vector<int> lift1(std::size_t(ctx1.m)), lift2(std::size_t(ctx2.m));
    for (int i = 0; i < ctx1.m; ++i) lift1[std::size_t(i)] = lift_index(ctx1.member(i), true);
    for (int i = 0; i < ctx2.m; ++i) lift2[std::size_t(i)] = lift_index(ctx2.member(i), false);

    std::unordered_set<DynBitset, DynBitsetHash> fps12;
    for (const auto& op : r12.ops) fps12.insert(op.closed);

    std::unordered_set<DynBitset, DynBitsetHash> images;
    for (const auto& op1 : r1.ops) {
        for (const auto& op2 : r2.ops) {
            std::vector<int> gens;
            for (int i = op1.closed.first(); i >= 0; i = op1.closed.next(i))
                gens.push_back(lift1[std::size_t(i)]);
            for (int i = op2.closed.first(); i >= 0; i = op2.closed.next(i))
                gens.push_back(lift2[std::size_t(i)]);
            StarOperation iota = meet_list(ctx12, gens);

            if (!fps12.count(iota.closed)) {
                out.detail = "generated operation is not among the enumerated product operations";
                return out;
            }
            if (!images.insert(iota.closed).second) {
                out.detail = "two operation pairs generate the same product operation";
                return out;
            }
            for (int i = 0; i < ctx1.m; ++i)
                if (iota.closure_map[std::size_t(lift1[std::size_t(i)])] !=
                    lift1[std::size_t(op1.closure_map[std::size_t(i)])]) {
                    out.detail = "closure of a lifted member differs from the lifted closure "
                                 "(first factor, member " +
                                 member_str(ctx1, i) + ")";
                    return out;
                }
            for (int i = 0; i < ctx2.m; ++i)
                if (iota.closure_map[std::size_t(lift2[std::size_t(i)])] !=
                    lift2[std::size_t(op2.closure_map[std::size_t(i)])]) {
                    out.detail = "closure of a lifted member differs from the lifted closure "
                                 "(second factor, member " +
                                 member_str(ctx2, i) + ")";
                    return out;
                }
        }
    }
    out.deep_injective = true;
    return out;
}

} // namespace starlat
