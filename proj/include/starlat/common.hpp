#pragma once
// Shared plumbing: element id type, resource budgets, error types, and a
// small dynamic bitset used for subspace-family index sets.

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace starlat {

// Field element id. Ids live in [0, q) with 0 = additive zero.
using felem = std::uint16_t;

// Resource caps. Every potentially exponential loop checks one of these and
// throws budget_error instead of grinding; the CLI maps that to exit code 3.
struct Budget {
    std::uint64_t max_field_q = 1u << 16;     // field table size
    std::uint64_t max_elements = 1u << 20;    // q^n caps for element iteration
    std::uint64_t max_subspaces = 2'000'000;  // subspace enumeration cap
    int max_classes = 26;                     // equivalence-class cap for enumeration
    std::uint64_t max_candidates = 1u << 26;  // downset/cross-check cap
};

class budget_error : public std::runtime_error {
public:
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

class usage_error : public std::runtime_error {
public:
    explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

// Internal-consistency failures (assertions with context). These indicate a
// bug in the engine, never bad user input.
class internal_error : public std::logic_error {
public:
    explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

// A requested verification failed on the instance (e.g. the family
// reduction hypothesis does not hold, or an expected count differs). The
// CLI maps this to exit code 1.
class mismatch_error : public std::runtime_error {
public:
    explicit mismatch_error(const std::string& what) : std::runtime_error(what) {}
};

// Dynamic bitset over [0, nbits). Deliberately minimal: exactly the ops the
// enumeration kernels need, with word-level AND/OR/subset tests.
class DynBitset {
public:
    DynBitset() = default;
    explicit DynBitset(std::size_t nbits)
        : nbits_(nbits), w_((nbits + 63) / 64, 0) {}

    std::size_t size() const { return nbits_; }

    void set(std::size_t i) { w_[i >> 6] |= (std::uint64_t(1) << (i & 63)); }
    void reset(std::size_t i) { w_[i >> 6] &= ~(std::uint64_t(1) << (i & 63)); }
    bool test(std::size_t i) const {
        return (w_[i >> 6] >> (i & 63)) & 1u;
    }

    void clear() { for (auto& x : w_) x = 0; }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto x : w_) c += std::size_t(__builtin_popcountll(x));
        return c;
    }

    bool any() const {
        for (auto x : w_) if (x) return true;
        return false;
    }

    DynBitset& operator|=(const DynBitset& o) {
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
        return *this;
    }
    DynBitset& operator&=(const DynBitset& o) {
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
        return *this;
    }

    bool subset_of(const DynBitset& o) const {
        for (std::size_t i = 0; i < w_.size(); ++i)
            if (w_[i] & ~o.w_[i]) return false;
        return true;
    }

    bool operator==(const DynBitset& o) const {
        return nbits_ == o.nbits_ && w_ == o.w_;
    }
    bool operator!=(const DynBitset& o) const { return !(*this == o); }
    // Deterministic total order (word-lexicographic); used to sort outputs.
    bool operator<(const DynBitset& o) const { return w_ < o.w_; }

    // Iterate set bits in ascending order: for (int i = bs.first(); i >= 0; i = bs.next(i))
    int first() const { return scan(0); }
    int next(int i) const { return scan(std::size_t(i) + 1); }

    std::size_t hash() const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (auto x : w_) {
            h ^= x;
            h *= 0xff51afd7ed558ccdull;
            h ^= h >> 33;
        }
        return std::size_t(h);
    }

    const std::vector<std::uint64_t>& words() const { return w_; }

private:
    int scan(std::size_t from) const {
        if (from >= nbits_) return -1;
        std::size_t wi = from >> 6;
        std::uint64_t cur = w_[wi] & (~std::uint64_t(0) << (from & 63));
        while (true) {
            if (cur) {
                std::size_t bit = (wi << 6) + std::size_t(__builtin_ctzll(cur));
                return bit < nbits_ ? int(bit) : -1;
            }
            if (++wi >= w_.size()) return -1;
            cur = w_[wi];
        }
    }

    std::size_t nbits_ = 0;
    std::vector<std::uint64_t> w_;
};

struct DynBitsetHash {
    std::size_t operator()(const DynBitset& b) const { return b.hash(); }
};

// Canonical fingerprint of a subspace: [n, dim, row-major RREF entries...].
// Entries are k-element ids; lexicographic order on the vector sorts first by
// dim (n is constant within one ambient space), then by matrix content.
using Fp = std::vector<std::uint32_t>;

struct FpHash {
    std::size_t operator()(const Fp& f) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (auto v : f) {
            h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h *= 0xff51afd7ed558ccdull;
        }
        return std::size_t(h);
    }
};

inline std::string fp_string(const Fp& f) {
    std::string s;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (i) s += '.';
        s += std::to_string(f[i]);
    }
    return s;
}

} // namespace starlat
