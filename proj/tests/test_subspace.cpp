#include "doctest.h"

#include "starlat/subspace.hpp"

#include <algorithm>
#include <set>

using namespace starlat;

namespace {

Budget budget;

AlgebraTable make(const std::string& shape_text, int p, int d = 1) {
    return build_algebra(parse_shape(shape_text), build_field(p, d, budget), budget);
}

using VecSet = std::set<Vec>;

VecSet as_set(const AlgebraTable& B, const Subspace& S) {
    auto v = elements_of(B.k, S, budget);
    return VecSet(v.begin(), v.end());
}

// Independent span oracle: closure of the input set under addition and
// scalar multiplication, by fixpoint iteration.
VecSet span_oracle(const AlgebraTable& B, const std::vector<Vec>& gens) {
    VecSet S;
    S.insert(Vec(B.n, 0));
    for (const Vec& g : gens)
        for (int c = 0; c < B.q(); ++c) S.insert(B.smul(felem(c), g));
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<Vec> cur(S.begin(), S.end());
        for (const Vec& a : cur)
            for (const Vec& b : cur)
                if (S.insert(B.add(a, b)).second) grew = true;
    }
    return S;
}

} // namespace

TEST_CASE("span basics and RREF canonicity") {
    AlgebraTable k3 = make("1,1+1,1+1,1", 2);
    CHECK(span(k3, {}).dim == 0);
    CHECK(span(k3, {k3.one}).dim == 1);
    Subspace S = span(k3, {Vec{1, 1, 1}, Vec{1, 1, 0}, Vec{0, 0, 1}});
    CHECK(S.dim == 2); // third vector is the sum of the first two

    // Any generating set of the same space yields the same fingerprint.
    Subspace T = span(k3, {Vec{0, 0, 1}, Vec{1, 1, 1}});
    CHECK(S.fp == T.fp);
    CHECK(S == T);

    AlgebraTable B9 = make("1,2", 3);
    Subspace U = span(B9, {Vec{1, 2}});
    Subspace U2 = span(B9, {Vec{2, 1}}); // scalar multiple: 2*(1,2) = (2,4 mod 3)
    CHECK(U.fp == U2.fp);
    CHECK(U.rows[0][0] == 1); // leading coefficient normalized
}

TEST_CASE("span matches the additive-closure oracle") {
    for (auto [shape, p] : {std::pair{std::string("1,1+1,1+1,1"), 2},
                            {std::string("1,3"), 2},
                            {std::string("1,2"), 3}}) {
        AlgebraTable B = make(shape, p);
        std::uint64_t total = B.element_count_u64(budget);
        // A spread of generating pairs.
        for (std::uint64_t i = 0; i < total; i += 2)
            for (std::uint64_t j = i; j < total; j += 3) {
                std::vector<Vec> gens{B.element(i), B.element(j)};
                Subspace S = span(B, gens);
                CHECK(as_set(B, S) == span_oracle(B, gens));
            }
    }
}

TEST_CASE("containment and elements_of agree") {
    AlgebraTable B = make("1,3", 2);
    Subspace S = span(B, {Vec{1, 0, 0}, Vec{0, 0, 1}});
    VecSet inside = as_set(B, S);
    CHECK(inside.size() == 4);
    for (std::uint64_t i = 0; i < 8; ++i) {
        Vec v = B.element(i);
        CHECK(contains(B.k, S, v) == (inside.count(v) > 0));
    }
    CHECK(subspace_leq(B.k, span(B, {Vec{1, 0, 1}}), S));
    CHECK_FALSE(subspace_leq(B.k, span(B, {Vec{0, 1, 0}}), S));
}

TEST_CASE("nullspace functionals annihilate exactly the subspace") {
    for (auto [shape, p] : {std::pair{std::string("1,1+1,1+1,1"), 3},
                            {std::string("1,2+1,2"), 2}}) {
        AlgebraTable B = make(shape, p);
        auto all = enumerate_all_subspaces(B.k, B.n, budget);
        for (const Subspace& S : all) {
            auto fun = nullspace_of(B.k, S);
            CHECK(int(fun.size()) == B.n - S.dim);
            for (const Vec& f : fun)
                for (const Vec& r : S.rows) {
                    felem acc = 0;
                    for (int i = 0; i < B.n; ++i)
                        acc = B.k.add(acc, B.k.mul(f[i], r[i]));
                    CHECK(acc == 0);
                }
            // (S^perp)^perp = S
            Subspace perp = span_rows(B.k, B.n, fun);
            Subspace back = span_rows(B.k, B.n, nullspace_of(B.k, perp));
            CHECK(back.fp == S.fp);
        }
    }
}

TEST_CASE("intersection and sum match element-set oracles") {
    AlgebraTable B = make("1,1+1,1+1,1", 2);
    auto all = enumerate_all_subspaces(B.k, B.n, budget);
    for (const Subspace& A1 : all)
        for (const Subspace& A2 : all) {
            VecSet s1 = as_set(B, A1), s2 = as_set(B, A2);
            VecSet both;
            std::set_intersection(s1.begin(), s1.end(), s2.begin(), s2.end(),
                                  std::inserter(both, both.begin()));
            CHECK(as_set(B, intersect(B.k, A1, A2)) == both);

            std::vector<Vec> gens = A1.rows;
            gens.insert(gens.end(), A2.rows.begin(), A2.rows.end());
            CHECK(as_set(B, sum(B.k, A1, A2)) == span_oracle(B, gens));
        }
}

TEST_CASE("colon by an element: worked cases") {
    // B = k[X]/(X^3), coords (1, X, X^2).
    AlgebraTable B = make("1,3", 2);
    Subspace I = span(B, {Vec{1, 0, 0}, Vec{0, 0, 1}}); // <1, X^2>
    Vec X{0, 1, 0};

    // (I : X) = <X, X^2>: x = a+bX+cX^2 has xX = aX+bX^2 in I iff a = 0.
    Subspace C = colon_element(B, I, X);
    CHECK(C.fp == span(B, {Vec{0, 1, 0}, Vec{0, 0, 1}}).fp);

    // (I : 0) = B.
    CHECK(colon_element(B, I, Vec{0, 0, 0}).dim == 3);

    // (I : unit) has the same dimension as I.
    Vec u{1, 1, 0};
    REQUIRE(B.is_unit(u));
    CHECK(colon_element(B, I, u).dim == I.dim);
}

TEST_CASE("colon by an element agrees with exhaustive search") {
    for (auto [shape, p] : {std::pair{std::string("1,3"), 2},
                            {std::string("1,1+1,1+1,1"), 2},
                            {std::string("2,1+1,1"), 2},
                            {std::string("1,2"), 3}}) {
        AlgebraTable B = make(shape, p);
        std::uint64_t total = B.element_count_u64(budget);
        auto all = enumerate_all_subspaces(B.k, B.n, budget);
        for (const Subspace& I : all) {
            VecSet iset = as_set(B, I);
            for (std::uint64_t bi = 0; bi < total; ++bi) {
                Vec b = B.element(bi);
                VecSet want;
                for (std::uint64_t xi = 0; xi < total; ++xi) {
                    Vec x = B.element(xi);
                    if (iset.count(B.mul(b, x))) want.insert(x);
                }
                CHECK(as_set(B, colon_element(B, I, b)) == want);
            }
        }
    }
}

TEST_CASE("colon by a module: worked cases and oracle") {
    AlgebraTable B = make("1,3", 2);
    Subspace one_span = span(B, {B.one});
    Subspace I = span(B, {Vec{1, 0, 0}, Vec{0, 0, 1}}); // <1, X^2>
    Subspace J = span(B, {Vec{1, 0, 0}, Vec{0, 1, 0}}); // <1, X>

    // (I : k) = I.
    CHECK(colon_module(B, I, one_span).fp == I.fp);
    // (k : J) = 0 for J in F_1 with dim > 1.
    CHECK(colon_module(B, one_span, J).dim == 0);
    // (<1,X^2> : <1,X>) = <X^2>.
    CHECK(colon_module(B, I, J).fp == span(B, {Vec{0, 0, 1}}).fp);

    // Exhaustive oracle over all subspace pairs.
    std::uint64_t total = B.element_count_u64(budget);
    auto all = enumerate_all_subspaces(B.k, B.n, budget);
    for (const Subspace& I1 : all)
        for (const Subspace& J1 : all) {
            VecSet iset = as_set(B, I1), jset = as_set(B, J1);
            VecSet want;
            for (std::uint64_t xi = 0; xi < total; ++xi) {
                Vec x = B.element(xi);
                bool ok = true;
                for (const Vec& j : jset)
                    if (!iset.count(B.mul(x, j))) { ok = false; break; }
                if (ok) want.insert(x);
            }
            CHECK(as_set(B, colon_module(B, I1, J1)) == want);
        }
}

TEST_CASE("colon laws") {
    AlgebraTable B = make("1,3", 2);
    std::uint64_t total = B.element_count_u64(budget);
    auto all = enumerate_all_subspaces(B.k, B.n, budget);
    for (const Subspace& I : all) {
        for (std::uint64_t bi = 0; bi < total; ++bi)
            for (std::uint64_t ci = 0; ci < total; ++ci) {
                Vec b = B.element(bi), c = B.element(ci);
                // ((I : b) : c) = (I : bc)
                CHECK(colon_element(B, colon_element(B, I, b), c).fp ==
                      colon_element(B, I, B.mul(b, c)).fp);
            }
        for (const Subspace& J : all) {
            Subspace IJ = colon_module(B, I, J);
            // J subset (I : (I : J))
            CHECK(subspace_leq(B.k, J, colon_module(B, I, IJ)));
            // monotone in I, antitone in J
            for (const Subspace& I2 : all) {
                if (subspace_leq(B.k, I, I2))
                    CHECK(subspace_leq(B.k, IJ, colon_module(B, I2, J)));
                if (subspace_leq(B.k, J, I2))
                    CHECK(subspace_leq(B.k, colon_module(B, I, I2), IJ));
            }
        }
    }
}

TEST_CASE("module closure IB") {
    AlgebraTable k3 = make("1,1+1,1+1,1", 2);
    CHECK(module_closure(k3, span(k3, {k3.one})).dim == 3);
    CHECK(module_closure(k3, zero_subspace(3)).dim == 0);
    // The non-regular working example: V = span{(1,1,0),(1,0,1)}.
    Subspace V = span(k3, {Vec{1, 1, 0}, Vec{1, 0, 1}});
    CHECK(module_closure(k3, V).dim == 3);

    AlgebraTable B = make("1,3", 2);
    // X generates the ideal (X), not B.
    CHECK(module_closure(B, span(B, {Vec{0, 1, 0}})).fp ==
          span(B, {Vec{0, 1, 0}, Vec{0, 0, 1}}).fp);
}

TEST_CASE("largest inner ideal Z(I)") {
    AlgebraTable B = make("1,3", 2);
    CHECK(largest_inner_ideal(B, full_subspace(B.k, 3)).dim == 3);
    CHECK(largest_inner_ideal(B, span(B, {Vec{1, 0, 0}, Vec{0, 0, 1}})).fp ==
          span(B, {Vec{0, 0, 1}}).fp);

    AlgebraTable k3 = make("1,1+1,1+1,1", 2);
    CHECK(largest_inner_ideal(k3, span(k3, {Vec{1, 1, 1}, Vec{1, 1, 0}})).fp ==
          span(k3, {Vec{0, 0, 1}}).fp);

    // Cross-check against summing the enumerated B-ideals inside I.
    for (auto* Bp : {&B, &k3}) {
        auto all = enumerate_all_subspaces(Bp->k, Bp->n, budget);
        for (const Subspace& I : all) {
            Subspace acc = zero_subspace(Bp->n);
            for (const Fp& ifp : Bp->b_ideals) {
                Subspace ideal = subspace_from_fp(ifp);
                if (subspace_leq(Bp->k, ideal, I)) acc = sum(Bp->k, acc, ideal);
            }
            Subspace Z = largest_inner_ideal(*Bp, I);
            CHECK(Z.fp == acc.fp);
            CHECK(subspace_leq(Bp->k, Z, I));
        }
    }
}

TEST_CASE("classification flags") {
    AlgebraTable k3 = make("1,1+1,1+1,1", 2);
    ClassifyFlags fk = classify(k3, span(k3, {k3.one}), budget);
    CHECK(fk.in_f0);
    CHECK(fk.in_freg);
    CHECK(fk.in_f1);

    Subspace V = span(k3, {Vec{1, 1, 0}, Vec{1, 0, 1}});
    ClassifyFlags fv = classify(k3, V, budget);
    CHECK(fv.in_f0);
    CHECK_FALSE(fv.in_freg);
    CHECK_FALSE(fv.in_f1);

    AlgebraTable B = make("1,3", 2);
    ClassifyFlags fm = classify(B, span(B, {Vec{0, 1, 0}, Vec{0, 0, 1}}), budget);
    CHECK_FALSE(fm.in_f0);
    CHECK_FALSE(fm.in_freg);
    CHECK_FALSE(fm.in_f1);
}

TEST_CASE("family enumeration") {
    AlgebraTable k2 = make("1,1+1,1", 2);
    CHECK(enumerate_all_subspaces(k2.k, 2, budget).size() == 5);

    AlgebraTable k3 = make("1,1+1,1+1,1", 2);
    SubspaceFamily f0 = enumerate_family(k3, FamilyKind::F0, budget);
    SubspaceFamily freg = enumerate_family(k3, FamilyKind::Freg, budget);
    SubspaceFamily f1 = enumerate_family(k3, FamilyKind::F1, budget);
    CHECK(f0.size() == 6);
    CHECK(freg.size() == 5);
    CHECK(f1.size() == 5);

    // V is the unique member of F_0 outside F_reg here.
    Subspace V = span(k3, {Vec{1, 1, 0}, Vec{1, 0, 1}});
    CHECK(f0.find(V.fp) >= 0);
    CHECK(freg.find(V.fp) == -1);

    // Inclusions as fingerprint sets.
    for (const Subspace& S : f1.members) CHECK(freg.find(S.fp) >= 0);
    for (const Subspace& S : freg.members) CHECK(f0.find(S.fp) >= 0);

    // |Max(B)| <= q forces F_0 = F_reg: t member components vs q.
    for (auto [shape, p] : {std::pair{std::string("1,1+1,1+1,1"), 3},
                            {std::string("3,1+1,1"), 2},
                            {std::string("1,3"), 2}}) {
        AlgebraTable B = make(shape, p);
        REQUIRE(B.shape.t() <= B.q());
        SubspaceFamily a = enumerate_family(B, FamilyKind::F0, budget);
        SubspaceFamily b = enumerate_family(B, FamilyKind::Freg, budget);
        REQUIRE(a.size() == b.size());
        for (int i = 0; i < a.size(); ++i) CHECK(a.members[i].fp == b.members[i].fp);
    }

    // F_1 sizes: Z(q, n-1), and the dim-2 layer of an n=4 family has
    // q^2+q+1 members.
    AlgebraTable k4 = make("1,1+1,1+1,1+1,1", 2);
    SubspaceFamily f1k4 = enumerate_family(k4, FamilyKind::F1, budget);
    CHECK(mpz_class(f1k4.size()) == count_subspaces(2, 3));
    int dim2 = 0;
    for (const Subspace& S : f1k4.members)
        if (S.dim == 2) ++dim2;
    CHECK(dim2 == 7); // q^2+q+1 at q=2

    AlgebraTable loc = make("1,4", 3);
    SubspaceFamily f1loc = enumerate_family(loc, FamilyKind::F1, budget);
    int dim2loc = 0;
    for (const Subspace& S : f1loc.members)
        if (S.dim == 2) ++dim2loc;
    CHECK(dim2loc == 13); // q^2+q+1 at q=3
}

TEST_CASE("subspace counting formulas") {
    CHECK(count_subspaces(2, 3, 1) == 7);
    CHECK(count_subspaces(2, 4, std::nullopt) == 67);
    CHECK(count_subspaces(3, 2, 1) == 4);
    CHECK(count_subspaces(5, 4, 0) == 1);
    CHECK(count_subspaces(5, 4, 4) == 1);
    CHECK(count_subspaces(2, 5, std::nullopt) == 374);

    // Enumeration sizes match the formula.
    for (auto [p, d, n] : {std::tuple{2, 1, 4}, {3, 1, 3}, {2, 2, 2}, {5, 1, 2}}) {
        FieldTable k = build_field(p, d, budget);
        auto all = enumerate_all_subspaces(k, n, budget);
        CHECK(mpz_class(long(all.size())) == count_subspaces(k.q, n));
        // ... per dimension too
        for (int t = 0; t <= n; ++t) {
            long cnt = 0;
            for (const Subspace& S : all)
                if (S.dim == t) ++cnt;
            CHECK(mpz_class(cnt) == count_subspaces(k.q, n, t));
        }
    }
}

TEST_CASE("fingerprint round trips and B-ideal fingerprints") {
    AlgebraTable B = make("1,3", 2);
    auto all = enumerate_all_subspaces(B.k, B.n, budget);
    for (const Subspace& S : all) {
        Subspace T = subspace_from_fp(S.fp);
        CHECK(T.rows == S.rows);
        CHECK(T.dim == S.dim);
    }
    // Algebra-emitted ideals are valid RREF fingerprints of the right spans.
    for (std::size_t i = 0; i < B.b_ideals.size(); ++i) {
        Subspace ideal = subspace_from_fp(B.b_ideals[i]);
        std::vector<Vec> gens;
        for (int c = 0; c < B.n; ++c)
            if (B.basis[c].l >= B.b_ideal_exps[i][B.basis[c].comp]) {
                Vec v(B.n, 0);
                v[c] = 1;
                gens.push_back(std::move(v));
            }
        CHECK(ideal.fp == span(B, gens).fp);
    }
}

TEST_CASE("budget guards") {
    Budget tiny;
    tiny.max_subspaces = 10;
    FieldTable k = build_field(2, 1, budget);
    CHECK_THROWS_AS(enumerate_all_subspaces(k, 4, tiny), budget_error);
    tiny.max_elements = 4;
    AlgebraTable B = make("1,3", 2);
    CHECK_THROWS_AS(elements_of(B.k, full_subspace(B.k, 3), tiny), budget_error);
}
