#pragma once
// k-subspaces of B in canonical RREF form: spans, intersections, sums,
// colon operations, module closure IB, the largest inner B-ideal Z(I),
// the families F_0 / F_reg / F_1, and subspace-count formulas.

#include "starlat/algebra.hpp"

#include <optional>
#include <unordered_map>

namespace starlat {

struct Subspace {
    int n = 0;
    int dim = 0;
    std::vector<Vec> rows; // RREF rows ordered by pivot, each leading with 1
    Fp fp;                 // [n, dim, row-major entries]

    bool operator==(const Subspace& o) const { return fp == o.fp; }
    bool operator!=(const Subspace& o) const { return fp != o.fp; }
};

Subspace span(const AlgebraTable& B, const std::vector<Vec>& vectors);
Subspace span_rows(const FieldTable& k, int n, std::vector<Vec> rows);
Subspace zero_subspace(int n);
Subspace full_subspace(const FieldTable& k, int n);
Subspace subspace_from_fp(const Fp& fp);

bool contains(const FieldTable& k, const Subspace& S, const Vec& v);
bool subspace_leq(const FieldTable& k, const Subspace& A, const Subspace& B);

// Basis of {f : f . v = 0 for all v in S}, as rows of length n.
std::vector<Vec> nullspace_of(const FieldTable& k, const Subspace& S);

Subspace intersect(const FieldTable& k, const Subspace& A, const Subspace& B);
Subspace sum(const FieldTable& k, const Subspace& A, const Subspace& B);

// (I : b) = {x : bx in I}.
Subspace colon_element(const AlgebraTable& B, const Subspace& I, const Vec& b);
// Variant with I's functionals precomputed via nullspace_of (hot path).
Subspace colon_element_pre(const AlgebraTable& B, const std::vector<Vec>& I_fun,
                           const Vec& b);
// (I : J) = {x : xJ subset I}.
Subspace colon_module(const AlgebraTable& B, const Subspace& I, const Subspace& J);
// IB, the smallest B-ideal containing I.
Subspace module_closure(const AlgebraTable& B, const Subspace& I);
// Z(I), the largest B-ideal contained in I.
Subspace largest_inner_ideal(const AlgebraTable& B, const Subspace& I);

// All q^dim elements, in lexicographic coefficient order.
std::vector<Vec> elements_of(const FieldTable& k, const Subspace& S,
                             const Budget& budget);

struct ClassifyFlags {
    bool in_f0 = false;  // IB = B
    bool in_freg = false; // contains a unit
    bool in_f1 = false;  // contains 1
};
ClassifyFlags classify(const AlgebraTable& B, const Subspace& I,
                       const Budget& budget);

enum class FamilyKind { F0, Freg, F1, All, Custom };
const char* family_kind_name(FamilyKind kind);

struct SubspaceFamily {
    FamilyKind kind = FamilyKind::Custom;
    std::vector<Subspace> members; // sorted by fingerprint (hence by dim)
    std::unordered_map<Fp, int, FpHash> index;

    int size() const { return int(members.size()); }
    int find(const Fp& fp) const {
        auto it = index.find(fp);
        return it == index.end() ? -1 : it->second;
    }
};

std::vector<Subspace> enumerate_all_subspaces(const FieldTable& k, int n,
                                              const Budget& budget);
SubspaceFamily enumerate_family(const AlgebraTable& B, FamilyKind kind,
                                const Budget& budget);

// Gaussian binomial [n choose t]_q, or the total Z(q,n) when t is absent.
mpz_class count_subspaces(int q, int n, std::optional<int> t = std::nullopt);

} // namespace starlat
