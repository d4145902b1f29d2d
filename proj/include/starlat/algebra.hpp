#pragma once
// The ambient algebra B = prod_i F_{q^{e_i}}[X]/(X^{f_i}) as an explicit
// n-dimensional k-algebra: structure constants, component bookkeeping,
// units, B-ideals, and element-level counting.

#include "starlat/common.hpp"
#include "starlat/ffield.hpp"

#include <gmpxx.h>

#include <string>
#include <utility>
#include <vector>

namespace starlat {

struct Shape {
    std::vector<std::pair<int, int>> pairs; // (e_i, f_i), all >= 1

    int t() const { return int(pairs.size()); }
    int n() const {
        int s = 0;
        for (auto [e, f] : pairs) s += e * f;
        return s;
    }
    int e_sum() const {
        int s = 0;
        for (auto [e, f] : pairs) s += e;
        return s;
    }
    std::string str() const;

    // Pairs sorted descending by (e*f, e); isomorphic algebras (component
    // permutations) share one canonical form, used for cache keys.
    Shape canonical() const;

    bool operator==(const Shape& o) const { return pairs == o.pairs; }
};

// Grammar: pairs "e,f" joined by "+", whitespace ignored; positions in error
// messages are 1-based pair positions.
Shape parse_shape(const std::string& text);

// Elements of B are coordinate vectors of length n over k.
using Vec = std::vector<felem>;

struct BasisLabel {
    int comp; // component index i
    int l;    // nilpotent power, 0 <= l < f_i
    int j;    // component-field basis index, 0 <= j < e_i
};

struct AlgebraTable {
    FieldTable k;
    Shape shape;
    int n = 0;

    // Component fields L_i = F_{q^{e_i}} and the embeddings k -> L_i.
    std::vector<FieldTable> comp_field;
    std::vector<std::vector<felem>> embed_k; // [i][k-id] -> L_i-id

    // decomp[i][x] = coordinates of x in the k-basis {1, G, ..., G^{e_i-1}}
    // of L_i (G = L_i's generator), each coordinate a k-id.
    std::vector<std::vector<std::vector<felem>>> decomp;

    // Basis ordered by (comp, l, j); comp_offset[i] = first index of
    // component i's block, block size e_i * f_i.
    std::vector<BasisLabel> basis;
    std::vector<int> comp_offset;

    // bprod[a][b] = coordinate vector of basis_a * basis_b.
    std::vector<std::vector<Vec>> bprod;

    Vec one;

    // All B-ideals (X^{j_1}) x ... x (X^{j_t}), 0 <= j_i <= f_i, as
    // fingerprints plus the exponent tuples, aligned by index.
    std::vector<Fp> b_ideals;
    std::vector<std::vector<int>> b_ideal_exps;

    int q() const { return k.q; }

    // --- element arithmetic ---------------------------------------------
    Vec add(const Vec& x, const Vec& y) const;
    Vec sub(const Vec& x, const Vec& y) const;
    Vec smul(felem c, const Vec& x) const;
    Vec mul(const Vec& x, const Vec& y) const;
    bool is_zero(const Vec& x) const;

    // Columns of the multiplication-by-b matrix: col[c] = b * basis_c.
    std::vector<Vec> mul_matrix(const Vec& b) const;

    // --- element iteration -----------------------------------------------
    // Coordinate vectors in lexicographic order of k-ids, c_0 major.
    mpz_class element_count() const;
    std::uint64_t element_count_u64(const Budget& budget) const;
    Vec element(std::uint64_t idx) const;
    std::uint64_t element_index(const Vec& x) const;

    // --- units and counting ----------------------------------------------
    // Componentwise residue test (x unit iff every component's degree-0
    // layer is nonzero).
    bool is_unit(const Vec& x) const;
    // Exhaustive-inverse cross-check, for debug oracles only.
    bool is_unit_slow(const Vec& x, const Budget& budget) const;
};

AlgebraTable build_algebra(const Shape& shape, const FieldTable& k,
                           const Budget& budget = Budget{});

// |U(B)| by exhaustive invertibility testing; verified against the exact
// product formula prod_i (q^{e_i f_i} - q^{e_i (f_i - 1)}) and the floor
// (q-1)^n before returning.
mpz_class count_units(const AlgebraTable& B, const Budget& budget = Budget{});

// The exact closed form prod_i (q^{e_i f_i} - q^{e_i (f_i - 1)}).
mpz_class count_units_formula(const Shape& shape, int q);

// All B-ideals as subspace fingerprints (copy of B.b_ideals).
std::vector<Fp> enumerate_b_ideals(const AlgebraTable& B);

struct SigmaReport {
    mpz_class count; // |{alpha : alpha^2 + r alpha + s = 0 for some r,s in k}|
    mpz_class bound; // q^{n-e+1} + 2^t (q^2 - q)
    bool holds = false;
};

SigmaReport sigma_quadratic_count(const AlgebraTable& B,
                                  const Budget& budget = Budget{});

std::string vec_str(const Vec& x);

} // namespace starlat
