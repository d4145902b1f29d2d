#include "starlat/subspace.hpp"

#include <algorithm>

namespace starlat {

namespace {

Fp make_fp(int n, const std::vector<Vec>& rows) {
    Fp fp;
    fp.reserve(2 + rows.size() * n);
    fp.push_back(std::uint32_t(n));
    fp.push_back(std::uint32_t(rows.size()));
    for (const Vec& r : rows)
        for (int j = 0; j < n; ++j) fp.push_back(r[j]);
    return fp;
}

// In-place reduction to RREF; returns the nonzero rows sorted by pivot.
std::vector<Vec> rref(const FieldTable& k, std::vector<Vec>& rows, int n) {
    int r = 0;
    for (int col = 0; col < n && r < int(rows.size()); ++col) {
        int sel = -1;
        for (int i = r; i < int(rows.size()); ++i)
            if (rows[i][col]) { sel = i; break; }
        if (sel < 0) continue;
        std::swap(rows[sel], rows[r]);
        felem inv = k.inv(rows[r][col]);
        for (int j = col; j < n; ++j) rows[r][j] = k.mul(inv, rows[r][j]);
        for (int i = 0; i < int(rows.size()); ++i) {
            if (i == r || !rows[i][col]) continue;
            felem f = rows[i][col];
            for (int j = col; j < n; ++j)
                rows[i][j] = k.sub(rows[i][j], k.mul(f, rows[r][j]));
        }
        ++r;
    }
    rows.resize(r);
    return rows;
}

} // namespace

Subspace span_rows(const FieldTable& k, int n, std::vector<Vec> rows) {
    rref(k, rows, n);
    Subspace S;
    S.n = n;
    S.dim = int(rows.size());
    S.rows = std::move(rows);
    S.fp = make_fp(n, S.rows);
    return S;
}

Subspace span(const AlgebraTable& B, const std::vector<Vec>& vectors) {
    for (const Vec& v : vectors)
        if (int(v.size()) != B.n) throw internal_error("span: wrong vector length");
    return span_rows(B.k, B.n, vectors);
}

Subspace zero_subspace(int n) {
    Subspace S;
    S.n = n;
    S.dim = 0;
    S.fp = make_fp(n, {});
    return S;
}

Subspace full_subspace(const FieldTable& k, int n) {
    std::vector<Vec> rows;
    for (int i = 0; i < n; ++i) {
        Vec r(n, 0);
        r[i] = 1;
        rows.push_back(std::move(r));
    }
    return span_rows(k, n, std::move(rows));
}

Subspace subspace_from_fp(const Fp& fp) {
    if (fp.size() < 2) throw internal_error("subspace_from_fp: truncated");
    Subspace S;
    S.n = int(fp[0]);
    S.dim = int(fp[1]);
    if (fp.size() != 2 + std::size_t(S.n) * S.dim)
        throw internal_error("subspace_from_fp: length mismatch");
    for (int r = 0; r < S.dim; ++r) {
        Vec row(S.n);
        for (int j = 0; j < S.n; ++j) row[j] = felem(fp[2 + r * S.n + j]);
        S.rows.push_back(std::move(row));
    }
    S.fp = fp;
    return S;
}

bool contains(const FieldTable& k, const Subspace& S, const Vec& v) {
    Vec w = v;
    for (const Vec& row : S.rows) {
        int pivot = 0;
        while (pivot < S.n && !row[pivot]) ++pivot;
        if (w[pivot]) {
            felem f = w[pivot];
            for (int j = pivot; j < S.n; ++j) w[j] = k.sub(w[j], k.mul(f, row[j]));
        }
    }
    for (felem c : w)
        if (c) return false;
    return true;
}

bool subspace_leq(const FieldTable& k, const Subspace& A, const Subspace& B) {
    if (A.dim > B.dim) return false;
    for (const Vec& r : A.rows)
        if (!contains(k, B, r)) return false;
    return true;
}

std::vector<Vec> nullspace_of(const FieldTable& k, const Subspace& S) {
    const int n = S.n;
    // S.rows is already RREF; read off the standard kernel basis of the
    // "row space as matrix" viewpoint: functionals f with S.rows * f^T = 0.
    std::vector<int> pivot_col(S.dim);
    std::vector<char> is_pivot(n, 0);
    for (int r = 0; r < S.dim; ++r) {
        int c = 0;
        while (c < n && !S.rows[r][c]) ++c;
        pivot_col[r] = c;
        is_pivot[c] = 1;
    }
    std::vector<Vec> fun;
    for (int c = 0; c < n; ++c) {
        if (is_pivot[c]) continue;
        Vec f(n, 0);
        f[c] = 1;
        for (int r = 0; r < S.dim; ++r) f[pivot_col[r]] = k.neg(S.rows[r][c]);
        fun.push_back(std::move(f));
    }
    return fun;
}

namespace {

// Solution space of M x = 0 (M given as rows over k).
std::vector<Vec> solve_homogeneous(const FieldTable& k, std::vector<Vec> M, int n) {
    rref(k, M, n);
    std::vector<int> pivot_col(M.size());
    std::vector<char> is_pivot(n, 0);
    for (std::size_t r = 0; r < M.size(); ++r) {
        int c = 0;
        while (c < n && !M[r][c]) ++c;
        pivot_col[r] = c;
        is_pivot[c] = 1;
    }
    std::vector<Vec> basis;
    for (int c = 0; c < n; ++c) {
        if (is_pivot[c]) continue;
        Vec v(n, 0);
        v[c] = 1;
        for (std::size_t r = 0; r < M.size(); ++r) v[pivot_col[r]] = k.neg(M[r][c]);
        basis.push_back(std::move(v));
    }
    return basis;
}

} // namespace

Subspace intersect(const FieldTable& k, const Subspace& A, const Subspace& B) {
    std::vector<Vec> M = nullspace_of(k, A);
    std::vector<Vec> nb = nullspace_of(k, B);
    M.insert(M.end(), nb.begin(), nb.end());
    return span_rows(k, A.n, solve_homogeneous(k, std::move(M), A.n));
}

Subspace sum(const FieldTable& k, const Subspace& A, const Subspace& B) {
    std::vector<Vec> rows = A.rows;
    rows.insert(rows.end(), B.rows.begin(), B.rows.end());
    return span_rows(k, A.n, std::move(rows));
}

Subspace colon_element_pre(const AlgebraTable& B, const std::vector<Vec>& I_fun,
                           const Vec& b) {
    const int n = B.n;
    std::vector<Vec> cols = B.mul_matrix(b);
    // Condition rows: f . (R_b x) = 0 for each functional f of I, i.e. the
    // row w with w[c] = f . cols[c].
    std::vector<Vec> M;
    M.reserve(I_fun.size());
    for (const Vec& f : I_fun) {
        Vec w(n, 0);
        for (int c = 0; c < n; ++c) {
            felem acc = 0;
            for (int i = 0; i < n; ++i)
                if (f[i] && cols[c][i]) acc = B.k.add(acc, B.k.mul(f[i], cols[c][i]));
            w[c] = acc;
        }
        M.push_back(std::move(w));
    }
    return span_rows(B.k, n, solve_homogeneous(B.k, std::move(M), n));
}

Subspace colon_element(const AlgebraTable& B, const Subspace& I, const Vec& b) {
    return colon_element_pre(B, nullspace_of(B.k, I), b);
}

Subspace colon_module(const AlgebraTable& B, const Subspace& I, const Subspace& J) {
    const int n = B.n;
    std::vector<Vec> I_fun = nullspace_of(B.k, I);
    std::vector<Vec> M;
    for (const Vec& b : J.rows) {
        std::vector<Vec> cols = B.mul_matrix(b);
        for (const Vec& f : I_fun) {
            Vec w(n, 0);
            for (int c = 0; c < n; ++c) {
                felem acc = 0;
                for (int i = 0; i < n; ++i)
                    if (f[i] && cols[c][i]) acc = B.k.add(acc, B.k.mul(f[i], cols[c][i]));
                w[c] = acc;
            }
            M.push_back(std::move(w));
        }
    }
    if (J.dim == 0) return full_subspace(B.k, n); // (I : 0) = B
    return span_rows(B.k, n, solve_homogeneous(B.k, std::move(M), n));
}

Subspace module_closure(const AlgebraTable& B, const Subspace& I) {
    std::vector<Vec> products;
    for (const Vec& r : I.rows) {
        std::vector<Vec> cols = B.mul_matrix(r);
        products.insert(products.end(), cols.begin(), cols.end());
    }
    return span_rows(B.k, B.n, std::move(products));
}

Subspace largest_inner_ideal(const AlgebraTable& B, const Subspace& I) {
    return colon_module(B, I, full_subspace(B.k, B.n));
}

std::vector<Vec> elements_of(const FieldTable& k, const Subspace& S,
                             const Budget& budget) {
    mpz_class total;
    mpz_ui_pow_ui(total.get_mpz_t(), k.q, S.dim);
    if (total > budget.max_elements)
        throw budget_error("subspace: q^dim = " + total.get_str() +
                           " exceeds element budget " +
                           std::to_string(budget.max_elements));
    std::vector<Vec> out;
    out.reserve(total.get_ui());
    std::vector<felem> coef(S.dim, 0);
    while (true) {
        Vec v(S.n, 0);
        for (int r = 0; r < S.dim; ++r) {
            if (!coef[r]) continue;
            for (int j = 0; j < S.n; ++j)
                if (S.rows[r][j]) v[j] = k.add(v[j], k.mul(coef[r], S.rows[r][j]));
        }
        out.push_back(std::move(v));
        int r = S.dim - 1;
        while (r >= 0 && coef[r] == k.q - 1) coef[r--] = 0;
        if (r < 0) break;
        ++coef[r];
    }
    return out;
}

ClassifyFlags classify(const AlgebraTable& B, const Subspace& I, const Budget& budget) {
    ClassifyFlags flags;
    flags.in_f0 = module_closure(B, I).dim == B.n;
    flags.in_f1 = contains(B.k, I, B.one);
    if (flags.in_f1) {
        flags.in_freg = true; // 1 is a unit
    } else {
        for (const Vec& v : elements_of(B.k, I, budget))
            if (B.is_unit(v)) { flags.in_freg = true; break; }
    }
    return flags;
}

const char* family_kind_name(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::F0: return "f0";
        case FamilyKind::Freg: return "freg";
        case FamilyKind::F1: return "f1";
        case FamilyKind::All: return "all";
        case FamilyKind::Custom: return "custom";
    }
    return "?";
}

std::vector<Subspace> enumerate_all_subspaces(const FieldTable& k, int n,
                                              const Budget& budget) {
    mpz_class total = count_subspaces(k.q, n);
    if (total > budget.max_subspaces)
        throw budget_error("subspace: Z(q,n) = " + total.get_str() +
                           " exceeds subspace budget " +
                           std::to_string(budget.max_subspaces));
    std::vector<Subspace> out;
    out.reserve(total.get_ui());

    for (int d = 0; d <= n; ++d) {
        // Pivot column sets, lexicographically.
        std::vector<int> piv(d);
        for (int i = 0; i < d; ++i) piv[i] = i;
        while (true) {
            // Free positions of the RREF pattern.
            std::vector<char> is_pivot(n, 0);
            for (int p : piv) is_pivot[p] = 1;
            std::vector<std::pair<int, int>> free_pos;
            for (int r = 0; r < d; ++r)
                for (int c = piv[r] + 1; c < n; ++c)
                    if (!is_pivot[c]) free_pos.emplace_back(r, c);

            std::vector<felem> vals(free_pos.size(), 0);
            while (true) {
                std::vector<Vec> rows(d, Vec(n, 0));
                for (int r = 0; r < d; ++r) rows[r][piv[r]] = 1;
                for (std::size_t i = 0; i < free_pos.size(); ++i)
                    rows[free_pos[i].first][free_pos[i].second] = vals[i];
                Subspace S;
                S.n = n;
                S.dim = d;
                S.rows = std::move(rows);
                S.fp = make_fp(n, S.rows);
                out.push_back(std::move(S));
                int i = int(vals.size()) - 1;
                while (i >= 0 && vals[i] == k.q - 1) vals[i--] = 0;
                if (i < 0) break;
                ++vals[i];
            }

            if (d == 0) break;
            int i = d - 1;
            while (i >= 0 && piv[i] == n - d + i) --i;
            if (i < 0) break;
            ++piv[i];
            for (int j = i + 1; j < d; ++j) piv[j] = piv[j - 1] + 1;
        }
    }
    if (mpz_class(long(out.size())) != total)
        throw internal_error("subspace: enumeration count disagrees with Z(q,n)");
    std::sort(out.begin(), out.end(),
              [](const Subspace& a, const Subspace& b) { return a.fp < b.fp; });
    return out;
}

SubspaceFamily enumerate_family(const AlgebraTable& B, FamilyKind kind,
                                const Budget& budget) {
    SubspaceFamily fam;
    fam.kind = kind;

    if (kind == FamilyKind::F1) {
        // Lift subspaces of B/k: images of e_1..e_{n-1} form a basis of the
        // quotient (coordinate 0 of `one` is 1). Each F_1 member is
        // span({one} + lifted rows), bijectively.
        const int n = B.n;
        const int qn = n - 1;
        std::vector<Subspace> quotient = enumerate_all_subspaces(B.k, qn, budget);
        for (const Subspace& W : quotient) {
            std::vector<Vec> rows;
            rows.push_back(B.one);
            for (const Vec& w : W.rows) {
                Vec lifted(n, 0);
                for (int j = 0; j < qn; ++j) lifted[j + 1] = w[j];
                rows.push_back(std::move(lifted));
            }
            Subspace S = span_rows(B.k, n, std::move(rows));
            if (S.dim != W.dim + 1)
                throw internal_error("subspace: F_1 lift dimension mismatch");
            if (module_closure(B, S).dim != B.n)
                throw internal_error("subspace: F_1 member fails IB = B");
            fam.members.push_back(std::move(S));
        }
    } else {
        std::vector<Subspace> all = enumerate_all_subspaces(B.k, B.n, budget);
        for (Subspace& S : all) {
            bool keep = true;
            switch (kind) {
                case FamilyKind::All:
                    break;
                case FamilyKind::F0:
                    keep = module_closure(B, S).dim == B.n;
                    break;
                case FamilyKind::Freg: {
                    ClassifyFlags flags = classify(B, S, budget);
                    keep = flags.in_freg;
                    if (keep && !flags.in_f0)
                        throw internal_error("subspace: F_reg member outside F_0");
                    break;
                }
                case FamilyKind::F1:
                case FamilyKind::Custom:
                    throw internal_error("subspace: bad family kind");
            }
            if (keep) fam.members.push_back(std::move(S));
        }
    }

    std::sort(fam.members.begin(), fam.members.end(),
              [](const Subspace& a, const Subspace& b) { return a.fp < b.fp; });
    for (int i = 0; i < int(fam.members.size()); ++i) {
        if (fam.index.count(fam.members[i].fp))
            throw internal_error("subspace: duplicate fingerprint in family");
        fam.index.emplace(fam.members[i].fp, i);
    }
    return fam;
}

mpz_class count_subspaces(int q, int n, std::optional<int> t) {
    auto binom = [&](int tt) {
        mpz_class num = 1, den = 1;
        for (int i = 0; i < tt; ++i) {
            mpz_class qn, qi;
            mpz_ui_pow_ui(qn.get_mpz_t(), q, n - i);
            mpz_ui_pow_ui(qi.get_mpz_t(), q, i + 1);
            num *= qn - 1;
            den *= qi - 1;
        }
        mpz_class r;
        mpz_divexact(r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
        return r;
    };
    if (t) {
        if (*t < 0 || *t > n) return 0;
        return binom(*t);
    }
    mpz_class total = 0;
    for (int tt = 0; tt <= n; ++tt) total += binom(tt);
    return total;
}

} // namespace starlat
