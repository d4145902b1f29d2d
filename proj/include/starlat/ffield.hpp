#pragma once
// Finite fields F_{p^d} as lookup tables.
//
// Elements are ids in [0, q). The id encodes the polynomial representation
// a_0 + a_1 x + ... + a_{d-1} x^{d-1} (x = class of X mod the chosen
// irreducible) as the base-p integer a_0 + a_1 p + ... . For prime fields the
// id is just the integer residue. Multiplication runs on exp/log tables over
// a fixed generator, addition on a Zech-logarithm table, so all runtime
// arithmetic is table lookups.

#include "starlat/common.hpp"

#include <optional>

namespace starlat {

struct FieldTable {
    int p = 0;                      // characteristic (prime)
    int d = 0;                      // extension degree over F_p
    int q = 0;                      // p^d
    // Monic modulus, coefficient of X^d first and constant term last
    // (the order used for the lexicographic-minimality rule).
    std::vector<felem> modulus;
    felem generator = 0;            // smallest id of multiplicative order q-1
    std::vector<felem> exp_table;   // exp_table[j] = g^j, j in [0, q-1)
    std::vector<int> log_table;     // log_table[id]; -1 for id 0
    std::vector<int> zech;          // zech[z] = log(1 + g^z), -1 if 1+g^z = 0
    int neg_one_log = 0;            // log(-1); 0 when p = 2

    bool is_prime_field() const { return d == 1; }

    felem add(felem a, felem b) const {
        if (a == 0) return b;
        if (b == 0) return a;
        int la = log_table[a], lb = log_table[b];
        int z = lb - la;
        if (z < 0) z += q - 1;
        int t = zech[z];
        if (t < 0) return 0;
        int e = la + t;
        if (e >= q - 1) e -= q - 1;
        return exp_table[e];
    }

    felem neg(felem a) const {
        if (a == 0 || p == 2) return a;
        int e = log_table[a] + neg_one_log;
        if (e >= q - 1) e -= q - 1;
        return exp_table[e];
    }

    felem sub(felem a, felem b) const { return add(a, neg(b)); }

    felem mul(felem a, felem b) const {
        if (a == 0 || b == 0) return 0;
        int e = log_table[a] + log_table[b];
        if (e >= q - 1) e -= q - 1;
        return exp_table[e];
    }

    felem inv(felem a) const {
        if (a == 0) throw internal_error("field: inverse of zero");
        int e = log_table[a] == 0 ? 0 : q - 1 - log_table[a];
        return exp_table[e];
    }

    felem div(felem a, felem b) const { return mul(a, inv(b)); }

    felem pow(felem a, long e) const {
        if (a == 0) {
            if (e == 0) return 1;
            if (e < 0) throw internal_error("field: 0 to negative power");
            return 0;
        }
        long m = e % (q - 1);
        if (m < 0) m += q - 1;
        long v = (long(log_table[a]) * m) % (q - 1);
        return exp_table[v];
    }

    felem frobenius(felem a) const { return pow(a, p); }

    // Image of an integer under Z -> F_p -> F_{p^d}.
    felem from_int(long c) const {
        long r = c % p;
        if (r < 0) r += p;
        return felem(r);
    }
};

// Smallest monic irreducible of degree d over F_p, by lexicographic order on
// the coefficient vector written leading-coefficient first / constant last.
std::vector<felem> find_irreducible(int p, int d);

// Build the full table field. Throws budget_error if p^d exceeds the cap.
FieldTable build_field(int p, int d, const Budget& budget = {});

// Exhaustive field-axiom verification (intended for q <= 256: the triple
// loops are cubic in q). Throws internal_error on any failure.
void verify_field_axioms(const FieldTable& F);

struct FieldEmbedding {
    const FieldTable* src = nullptr;
    const FieldTable* dst = nullptr;
    std::vector<felem> map;         // size src->q
    felem generator_image = 0;

    felem operator()(felem a) const { return map[a]; }
};

// Embedding F_{p^m} -> F_{p^{m e}}: finds the smallest root in dst of the
// minimal polynomial of src's generator over F_p, maps multiplicatively, and
// verifies additivity and multiplicativity over all pairs.
FieldEmbedding embed_subfield(const FieldTable& src, const FieldTable& dst);

// (p, d) factorization of a prime power; nullopt if q is not one.
std::optional<std::pair<int, int>> prime_power(long q);

} // namespace starlat
