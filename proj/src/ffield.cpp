#include "starlat/ffield.hpp"

#include <algorithm>
#include <numeric>

namespace starlat {

namespace {

// Build-time polynomial arithmetic over F_p. Polynomials are little-endian
// coefficient vectors (index = degree); runtime arithmetic never touches
// this, it only seeds the lookup tables.
using Poly = std::vector<int>;

void ptrim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

Poly pmul(const Poly& a, const Poly& b, int p) {
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            c[i + j] = int((c[i + j] + long(a[i]) * b[j]) % p);
    ptrim(c);
    return c;
}

// a mod f, f monic.
Poly pmod(Poly a, const Poly& f, int p) {
    ptrim(a);
    int df = int(f.size()) - 1;
    while (int(a.size()) - 1 >= df) {
        int k = int(a.size()) - 1 - df;
        int c = a.back();
        for (int i = 0; i <= df; ++i) {
            a[k + i] = int(((a[k + i] - long(c) * f[i]) % p + p) % p);
        }
        ptrim(a);
    }
    return a;
}

Poly padd(Poly a, const Poly& b, int p) {
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] = (a[i] + b[i]) % p;
    ptrim(a);
    return a;
}

Poly psub(Poly a, const Poly& b, int p) {
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] = ((a[i] - b[i]) % p + p) % p;
    ptrim(a);
    return a;
}

// X^e mod f by square and multiply.
Poly xpowmod(long e, const Poly& f, int p) {
    Poly result{1};
    Poly base{0, 1}; // X
    base = pmod(base, f, p);
    while (e > 0) {
        if (e & 1) result = pmod(pmul(result, base, p), f, p);
        base = pmod(pmul(base, base, p), f, p);
        e >>= 1;
    }
    return result;
}

Poly pgcd(Poly a, Poly b, int p) {
    ptrim(a);
    ptrim(b);
    while (!b.empty()) {
        // make b monic for pmod
        int lead = b.back();
        if (lead != 1) {
            // multiply b by lead^{-1} mod p
            int inv = 1;
            for (int t = 1; t < p; ++t)
                if ((t * lead) % p == 1) { inv = t; break; }
            for (auto& c : b) c = (c * inv) % p;
        }
        Poly r = pmod(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

std::vector<int> prime_factors(long n) {
    std::vector<int> fs;
    for (long f = 2; f * f <= n; ++f) {
        if (n % f == 0) {
            fs.push_back(int(f));
            while (n % f == 0) n /= f;
        }
    }
    if (n > 1) fs.push_back(int(n));
    return fs;
}

bool is_irreducible(const Poly& f, int p) {
    int d = int(f.size()) - 1;
    if (d == 1) return true;
    // X^{p^d} == X (mod f) and gcd(f, X^{p^{d/r}} - X) = 1 for each prime r|d.
    long pd = 1;
    for (int i = 0; i < d; ++i) pd *= p;
    Poly x{0, 1};
    if (psub(xpowmod(pd, f, p), x, p) != Poly{}) return false;
    for (int r : prime_factors(d)) {
        long e = 1;
        for (int i = 0; i < d / r; ++i) e *= p;
        Poly g = psub(xpowmod(e, f, p), x, p);
        Poly h = pgcd(f, g, p);
        if (int(h.size()) - 1 != 0) return false;
    }
    return true;
}

long id_of_poly(const Poly& a, int p) {
    long id = 0;
    for (std::size_t i = a.size(); i-- > 0;) id = id * p + a[i];
    return id;
}

Poly poly_of_id(long id, int p) {
    Poly a;
    while (id > 0) {
        a.push_back(int(id % p));
        id /= p;
    }
    return a;
}

} // namespace

std::vector<felem> find_irreducible(int p, int d) {
    if (d < 1) throw usage_error("find_irreducible: degree must be >= 1");
    // Odometer over (c_{d-1}, ..., c_1, c_0) with c_{d-1} most significant,
    // which is ascending lexicographic order on the big-endian coefficient
    // vector [1, c_{d-1}, ..., c_0] (constant term last).
    std::vector<int> c(d, 0);
    while (true) {
        Poly f(d + 1, 0);
        f[d] = 1;
        for (int i = 0; i < d; ++i) f[i] = c[d - 1 - i];
        if (is_irreducible(f, p)) {
            std::vector<felem> out(d + 1);
            for (int i = 0; i <= d; ++i) out[i] = felem(f[d - i]);
            return out;
        }
        int i = d - 1;
        while (i >= 0 && c[i] == p - 1) c[i--] = 0;
        if (i < 0) throw internal_error("find_irreducible: exhausted candidates");
        ++c[i];
    }
}

FieldTable build_field(int p, int d, const Budget& budget) {
    for (int f : prime_factors(p))
        if (f != p) throw usage_error("build_field: p is not prime");
    long q = 1;
    for (int i = 0; i < d; ++i) {
        q *= p;
        if (std::uint64_t(q) > budget.max_field_q)
            throw budget_error("build_field: q = p^d exceeds field budget " +
                               std::to_string(budget.max_field_q));
    }

    FieldTable F;
    F.p = p;
    F.d = d;
    F.q = int(q);
    F.modulus = find_irreducible(p, d);

    Poly fpoly(d + 1);
    for (int i = 0; i <= d; ++i) fpoly[i] = F.modulus[d - i];

    auto mul_ids = [&](long a, long b) -> long {
        return id_of_poly(pmod(pmul(poly_of_id(a, p), poly_of_id(b, p), p), fpoly, p), p);
    };

    // Generator: smallest id whose order is exactly q-1.
    auto factors = prime_factors(q - 1);
    auto pow_id = [&](long a, long e) {
        long r = 1, base = a;
        while (e > 0) {
            if (e & 1) r = mul_ids(r, base);
            base = mul_ids(base, base);
            e >>= 1;
        }
        return r;
    };
    long gen = -1;
    for (long cand = 1; cand < q; ++cand) {
        bool ok = true;
        for (int r : factors)
            if (pow_id(cand, (q - 1) / r) == 1) { ok = false; break; }
        if (ok && (q == 2 ? cand == 1 : true)) { gen = cand; break; }
    }
    if (gen < 0) throw internal_error("build_field: no generator found");
    F.generator = felem(gen);

    F.exp_table.assign(q - 1, 0);
    F.log_table.assign(q, -1);
    long cur = 1;
    for (long j = 0; j < q - 1; ++j) {
        F.exp_table[j] = felem(cur);
        if (F.log_table[cur] != -1)
            throw internal_error("build_field: generator order too small");
        F.log_table[cur] = int(j);
        cur = mul_ids(cur, gen);
    }
    if (cur != 1) throw internal_error("build_field: generator does not close cycle");

    // Zech table: zech[z] = log(1 + g^z), -1 when the sum is zero.
    F.zech.assign(q - 1, -1);
    for (long z = 0; z < q - 1; ++z) {
        Poly s = padd(Poly{1}, poly_of_id(F.exp_table[z], p), p);
        long id = id_of_poly(s, p);
        F.zech[z] = id == 0 ? -1 : F.log_table[id];
    }
    F.neg_one_log = (p == 2) ? 0 : (q - 1) / 2;
    return F;
}

void verify_field_axioms(const FieldTable& F) {
    const int q = F.q;
    auto fail = [&](const std::string& what) {
        throw internal_error("field axioms (q=" + std::to_string(q) + "): " + what);
    };
    if (F.add(0, 0) != 0 || F.mul(1, 1) != 1) fail("identity sanity");
    for (int a = 0; a < q; ++a) {
        if (F.add(felem(a), 0) != a) fail("additive identity");
        if (F.mul(felem(a), 1) != a) fail("multiplicative identity");
        if (F.add(felem(a), F.neg(felem(a))) != 0) fail("additive inverse");
        if (a != 0 && F.mul(felem(a), F.inv(felem(a))) != 1) fail("multiplicative inverse");
    }
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b) {
            if (F.add(felem(a), felem(b)) != F.add(felem(b), felem(a))) fail("add commutativity");
            if (F.mul(felem(a), felem(b)) != F.mul(felem(b), felem(a))) fail("mul commutativity");
        }
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b)
            for (int c = 0; c < q; ++c) {
                felem fa = felem(a), fb = felem(b), fc = felem(c);
                if (F.add(F.add(fa, fb), fc) != F.add(fa, F.add(fb, fc))) fail("add associativity");
                if (F.mul(F.mul(fa, fb), fc) != F.mul(fa, F.mul(fb, fc))) fail("mul associativity");
                if (F.mul(fa, F.add(fb, fc)) != F.add(F.mul(fa, fb), F.mul(fa, fc)))
                    fail("distributivity");
            }
    // Frobenius is additive (redundant given the above, but cheap and direct).
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b)
            if (F.frobenius(F.add(felem(a), felem(b))) !=
                F.add(F.frobenius(felem(a)), F.frobenius(felem(b))))
                fail("frobenius additivity");
}

FieldEmbedding embed_subfield(const FieldTable& src, const FieldTable& dst) {
    if (src.p != dst.p || dst.d % src.d != 0)
        throw usage_error("embed_subfield: not a subfield situation");
    const int p = src.p;
    const int m = src.d;

    // Minimal polynomial of src.generator over F_p: since the generator is
    // primitive, {1, g, ..., g^{m-1}} is an F_p-basis, so solve
    // sum_j c_j g^j = -g^m with one Gaussian elimination mod p.
    std::vector<std::vector<int>> A(m, std::vector<int>(m + 1, 0));
    {
        felem gj = 1;
        for (int j = 0; j < m; ++j) {
            long id = gj;
            for (int row = 0; row < m; ++row) {
                A[row][j] = int(id % p);
                id /= p;
            }
            gj = src.mul(gj, src.generator);
        }
        // gj now = g^m; rhs = -g^m digitwise
        long id = gj;
        for (int row = 0; row < m; ++row) {
            A[row][m] = int((p - id % p) % p);
            id /= p;
        }
    }
    std::vector<int> minpoly(m + 1, 0); // little-endian, monic
    {
        int r = 0;
        std::vector<int> pivot_col(m, -1);
        for (int col = 0; col < m && r < m; ++col) {
            int sel = -1;
            for (int i = r; i < m; ++i)
                if (A[i][col] != 0) { sel = i; break; }
            if (sel < 0) continue;
            std::swap(A[sel], A[r]);
            int invp = 1;
            for (int t = 1; t < p; ++t)
                if ((t * A[r][col]) % p == 1) { invp = t; break; }
            for (int j = col; j <= m; ++j) A[r][j] = (A[r][j] * invp) % p;
            for (int i = 0; i < m; ++i) {
                if (i == r || A[i][col] == 0) continue;
                int f = A[i][col];
                for (int j = col; j <= m; ++j)
                    A[i][j] = ((A[i][j] - f * A[r][j]) % p + p) % p;
            }
            pivot_col[r++] = col;
        }
        if (r != m) throw internal_error("embed_subfield: generator powers dependent");
        for (int i = 0; i < m; ++i) minpoly[pivot_col[i]] = A[i][m];
        minpoly[m] = 1;
    }

    // Roots in dst; take the smallest id.
    std::vector<felem> roots;
    for (int x = 0; x < dst.q; ++x) {
        felem acc = 0, xp = 1;
        for (int j = 0; j <= m; ++j) {
            acc = dst.add(acc, dst.mul(dst.from_int(minpoly[j]), xp));
            if (j < m) xp = dst.mul(xp, felem(x));
        }
        if (acc == 0) roots.push_back(felem(x));
    }
    if (roots.empty()) throw internal_error("embed_subfield: minimal polynomial has no root");
    felem r0 = *std::min_element(roots.begin(), roots.end());

    FieldEmbedding E;
    E.src = &src;
    E.dst = &dst;
    E.generator_image = r0;
    E.map.assign(src.q, 0);
    felem img = 1;
    for (int j = 0; j < src.q - 1; ++j) {
        E.map[src.exp_table[j]] = img;
        img = dst.mul(img, r0);
    }
    E.map[0] = 0;

    // Exhaustive checks: ring homomorphism, injective, unital.
    if (E.map[1] != 1) throw internal_error("embed_subfield: 1 not fixed");
    std::vector<char> seen(dst.q, 0);
    for (int a = 0; a < src.q; ++a) {
        if (seen[E.map[a]]) throw internal_error("embed_subfield: not injective");
        seen[E.map[a]] = 1;
    }
    for (int a = 0; a < src.q; ++a)
        for (int b = 0; b < src.q; ++b) {
            if (E.map[src.add(felem(a), felem(b))] != dst.add(E.map[a], E.map[b]))
                throw internal_error("embed_subfield: additivity fails");
            if (E.map[src.mul(felem(a), felem(b))] != dst.mul(E.map[a], E.map[b]))
                throw internal_error("embed_subfield: multiplicativity fails");
        }
    return E;
}

std::optional<std::pair<int, int>> prime_power(long q) {
    if (q < 2) return std::nullopt;
    auto fs = prime_factors(q);
    if (fs.size() != 1) return std::nullopt;
    int p = fs[0], d = 0;
    long t = q;
    while (t > 1) {
        if (t % p != 0) return std::nullopt;
        t /= p;
        ++d;
    }
    return std::make_pair(p, d);
}

} // namespace starlat
