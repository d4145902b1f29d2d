#include "starlat/algebra.hpp"

#include <algorithm>
#include <cctype>

namespace starlat {

std::string Shape::str() const {
    std::string s;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i) s += '+';
        s += std::to_string(pairs[i].first) + ',' + std::to_string(pairs[i].second);
    }
    return s;
}

Shape Shape::canonical() const {
    Shape c = *this;
    std::sort(c.pairs.begin(), c.pairs.end(), [](auto a, auto b) {
        long wa = long(a.first) * a.second, wb = long(b.first) * b.second;
        if (wa != wb) return wa > wb;
        return a.first > b.first;
    });
    return c;
}

Shape parse_shape(const std::string& text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.empty()) throw usage_error("shape: empty");

    Shape shape;
    std::size_t pos = 0;
    int pair_no = 1;
    auto read_int = [&](const char* which) -> long {
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start)
            throw usage_error("shape: expected " + std::string(which) + " at position " +
                              std::to_string(pair_no));
        long v = 0;
        for (std::size_t i = start; i < pos; ++i) {
            v = v * 10 + (s[i] - '0');
            if (v > 1'000'000) throw usage_error("shape: number too large at position " +
                                                 std::to_string(pair_no));
        }
        return v;
    };
    while (true) {
        long e = read_int("e");
        if (pos >= s.size() || s[pos] != ',')
            throw usage_error("shape: expected ',' at position " + std::to_string(pair_no));
        ++pos;
        long f = read_int("f");
        if (e < 1) throw usage_error("shape: e must be >= 1 at position " +
                                     std::to_string(pair_no));
        if (f < 1) throw usage_error("shape: f must be >= 1 at position " +
                                     std::to_string(pair_no));
        shape.pairs.emplace_back(int(e), int(f));
        if (pos == s.size()) break;
        if (s[pos] != '+')
            throw usage_error("shape: expected '+' at position " + std::to_string(pair_no));
        ++pos;
        ++pair_no;
    }
    return shape;
}

namespace {

// Fingerprint of a span of distinct basis vectors (already RREF: unit rows
// sorted by pivot).
Fp coordinate_subspace_fp(int n, const std::vector<int>& coords) {
    Fp fp;
    fp.push_back(std::uint32_t(n));
    fp.push_back(std::uint32_t(coords.size()));
    for (int c : coords)
        for (int j = 0; j < n; ++j) fp.push_back(j == c ? 1 : 0);
    return fp;
}

} // namespace

AlgebraTable build_algebra(const Shape& shape, const FieldTable& k, const Budget& budget) {
    if (shape.t() < 1) throw usage_error("algebra: shape must have at least one component");
    AlgebraTable B;
    B.k = k;
    B.shape = shape;
    B.n = shape.n();

    const int t = shape.t();
    B.comp_field.reserve(t);
    B.comp_offset.resize(t);

    int offset = 0;
    for (int i = 0; i < t; ++i) {
        auto [e, f] = shape.pairs[i];
        B.comp_offset[i] = offset;
        for (int l = 0; l < f; ++l)
            for (int j = 0; j < e; ++j) B.basis.push_back({i, l, j});
        offset += e * f;

        FieldTable L = build_field(k.p, k.d * e, budget);
        FieldEmbedding emb = embed_subfield(k, L);
        B.embed_k.push_back(emb.map);

        // Decomposition of every x in L over the k-basis {G^0..G^{e-1}}:
        // enumerate all coordinate tuples, record the (bijective) map.
        std::vector<std::vector<felem>> dec(L.q);
        std::vector<char> seen(L.q, 0);
        std::vector<felem> powg(e);
        {
            felem gp = 1;
            for (int j = 0; j < e; ++j) {
                powg[j] = gp;
                gp = L.mul(gp, L.generator);
            }
        }
        std::vector<felem> tuple(e, 0);
        while (true) {
            felem s = 0;
            for (int j = 0; j < e; ++j)
                s = L.add(s, L.mul(emb.map[tuple[j]], powg[j]));
            if (seen[s]) throw internal_error("algebra: basis powers not independent");
            seen[s] = 1;
            dec[s] = tuple;
            int j = e - 1;
            while (j >= 0 && tuple[j] == k.q - 1) tuple[j--] = 0;
            if (j < 0) break;
            ++tuple[j];
        }
        for (int x = 0; x < L.q; ++x)
            if (!seen[x]) throw internal_error("algebra: decomposition not surjective");
        B.decomp.push_back(std::move(dec));
        B.comp_field.push_back(std::move(L));
    }

    const int n = B.n;

    // Structure constants: (G^j X^l)(G^j' X^l') = G^{j+j'} X^{l+l'},
    // truncated at X^{f_i}, with G^{j+j'} re-expanded over the k-basis.
    B.bprod.assign(n, std::vector<Vec>(n, Vec(n, 0)));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const BasisLabel& la = B.basis[a];
            const BasisLabel& lb = B.basis[b];
            if (la.comp != lb.comp) continue;
            const int i = la.comp;
            auto [e, f] = shape.pairs[i];
            const int l = la.l + lb.l;
            if (l >= f) continue;
            const FieldTable& L = B.comp_field[i];
            felem g = L.pow(L.generator, la.j + lb.j);
            const std::vector<felem>& coords = B.decomp[i][g];
            for (int j = 0; j < e; ++j)
                B.bprod[a][b][B.comp_offset[i] + l * e + j] = coords[j];
        }

    // Exhaustive associativity/commutativity on basis triples.
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (B.bprod[a][b] != B.bprod[b][a])
                throw internal_error("algebra: basis product not commutative");
            for (int c = 0; c < n; ++c) {
                Vec left(n, 0), right(n, 0);
                for (int r = 0; r < n; ++r) {
                    if (B.bprod[a][b][r])
                        left = B.add(left, B.smul(B.bprod[a][b][r], B.bprod[r][c]));
                    if (B.bprod[b][c][r])
                        right = B.add(right, B.smul(B.bprod[b][c][r], B.bprod[a][r]));
                }
                if (left != right)
                    throw internal_error("algebra: basis product not associative");
            }
        }

    B.one.assign(n, 0);
    for (int i = 0; i < t; ++i) B.one[B.comp_offset[i]] = 1;

    // B-ideals: products of (X^{j_i}); spanned by basis labels with l >= j_i.
    std::vector<int> exps(t, 0);
    while (true) {
        std::vector<int> coords;
        for (int bidx = 0; bidx < n; ++bidx)
            if (B.basis[bidx].l >= exps[B.basis[bidx].comp]) coords.push_back(bidx);
        B.b_ideals.push_back(coordinate_subspace_fp(n, coords));
        B.b_ideal_exps.push_back(exps);
        int i = t - 1;
        while (i >= 0 && exps[i] == shape.pairs[i].second) exps[i--] = 0;
        if (i < 0) break;
        ++exps[i];
    }
    {
        long expect = 1;
        for (auto [e, f] : shape.pairs) expect *= f + 1;
        if (long(B.b_ideals.size()) != expect)
            throw internal_error("algebra: B-ideal count mismatch");
    }

    return B;
}

Vec AlgebraTable::add(const Vec& x, const Vec& y) const {
    Vec r(n);
    for (int i = 0; i < n; ++i) r[i] = k.add(x[i], y[i]);
    return r;
}

Vec AlgebraTable::sub(const Vec& x, const Vec& y) const {
    Vec r(n);
    for (int i = 0; i < n; ++i) r[i] = k.sub(x[i], y[i]);
    return r;
}

Vec AlgebraTable::smul(felem c, const Vec& x) const {
    Vec r(n);
    for (int i = 0; i < n; ++i) r[i] = k.mul(c, x[i]);
    return r;
}

Vec AlgebraTable::mul(const Vec& x, const Vec& y) const {
    Vec r(n, 0);
    for (int a = 0; a < n; ++a) {
        if (!x[a]) continue;
        for (int b = 0; b < n; ++b) {
            if (!y[b]) continue;
            felem c = k.mul(x[a], y[b]);
            const Vec& p = bprod[a][b];
            for (int i = 0; i < n; ++i)
                if (p[i]) r[i] = k.add(r[i], k.mul(c, p[i]));
        }
    }
    return r;
}

bool AlgebraTable::is_zero(const Vec& x) const {
    for (felem c : x)
        if (c) return false;
    return true;
}

std::vector<Vec> AlgebraTable::mul_matrix(const Vec& b) const {
    std::vector<Vec> cols(n);
    for (int c = 0; c < n; ++c) {
        Vec col(n, 0);
        for (int a = 0; a < n; ++a) {
            if (!b[a]) continue;
            const Vec& p = bprod[a][c];
            for (int i = 0; i < n; ++i)
                if (p[i]) col[i] = k.add(col[i], k.mul(b[a], p[i]));
        }
        cols[c] = std::move(col);
    }
    return cols;
}

mpz_class AlgebraTable::element_count() const {
    mpz_class c;
    mpz_ui_pow_ui(c.get_mpz_t(), k.q, n);
    return c;
}

std::uint64_t AlgebraTable::element_count_u64(const Budget& budget) const {
    mpz_class c = element_count();
    if (c > budget.max_elements)
        throw budget_error("algebra: q^n = " + c.get_str() + " exceeds element budget " +
                           std::to_string(budget.max_elements));
    return c.get_ui();
}

Vec AlgebraTable::element(std::uint64_t idx) const {
    Vec x(n);
    for (int i = n - 1; i >= 0; --i) {
        x[i] = felem(idx % k.q);
        idx /= k.q;
    }
    return x;
}

std::uint64_t AlgebraTable::element_index(const Vec& x) const {
    std::uint64_t idx = 0;
    for (int i = 0; i < n; ++i) idx = idx * k.q + x[i];
    return idx;
}

bool AlgebraTable::is_unit(const Vec& x) const {
    for (int i = 0; i < shape.t(); ++i) {
        auto [e, f] = shape.pairs[i];
        bool nonzero = false;
        for (int j = 0; j < e; ++j)
            if (x[comp_offset[i] + j]) { nonzero = true; break; }
        if (!nonzero) return false;
    }
    return true;
}

bool AlgebraTable::is_unit_slow(const Vec& x, const Budget& budget) const {
    std::uint64_t total = element_count_u64(budget);
    for (std::uint64_t i = 0; i < total; ++i)
        if (mul(x, element(i)) == one) return true;
    return false;
}

mpz_class count_units_formula(const Shape& shape, int q) {
    mpz_class total = 1;
    for (auto [e, f] : shape.pairs) {
        mpz_class full, sub;
        mpz_ui_pow_ui(full.get_mpz_t(), q, e * f);
        mpz_ui_pow_ui(sub.get_mpz_t(), q, e * (f - 1));
        total *= full - sub;
    }
    return total;
}

mpz_class count_units(const AlgebraTable& B, const Budget& budget) {
    std::uint64_t total = B.element_count_u64(budget);
    mpz_class count = 0;
    for (std::uint64_t i = 0; i < total; ++i)
        if (B.is_unit(B.element(i))) ++count;

    if (count != count_units_formula(B.shape, B.q()))
        throw internal_error("algebra: unit count disagrees with product formula");
    mpz_class floor_bound;
    mpz_ui_pow_ui(floor_bound.get_mpz_t(), B.q() - 1, B.n);
    if (count < floor_bound)
        throw internal_error("algebra: unit count below (q-1)^n");
    return count;
}

std::vector<Fp> enumerate_b_ideals(const AlgebraTable& B) { return B.b_ideals; }

SigmaReport sigma_quadratic_count(const AlgebraTable& B, const Budget& budget) {
    std::uint64_t total = B.element_count_u64(budget);
    const FieldTable& k = B.k;
    SigmaReport rep;
    rep.count = 0;
    for (std::uint64_t i = 0; i < total; ++i) {
        Vec a = B.element(i);
        Vec a2 = B.mul(a, a);
        bool solves = false;
        for (int r = 0; r < k.q && !solves; ++r)
            for (int s = 0; s < k.q && !solves; ++s) {
                Vec v = B.add(a2, B.smul(felem(r), a));
                v = B.add(v, B.smul(felem(s), B.one));
                if (B.is_zero(v)) solves = true;
            }
        if (solves) ++rep.count;
    }
    mpz_class qpow;
    mpz_ui_pow_ui(qpow.get_mpz_t(), k.q, B.n - B.shape.e_sum() + 1);
    mpz_class two_t;
    mpz_ui_pow_ui(two_t.get_mpz_t(), 2, B.shape.t());
    rep.bound = qpow + two_t * (mpz_class(k.q) * k.q - k.q);
    rep.holds = rep.count <= rep.bound;
    return rep;
}

std::string vec_str(const Vec& x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(x[i]);
    }
    return s + ")";
}

} // namespace starlat
