#pragma once
// Star operations on (k, B): principal operations, the multiplicative-axiom
// validity oracle, equivalence classes with their preorder, exhaustive
// enumeration, canonical-ideal detection, independent witness families, and
// the product embedding check.

#include "starlat/subspace.hpp"

#include <optional>

namespace starlat {

// The working family with all index-level tables the engine runs on.
// Built once, then immutable.
struct FamilyContext {
    const AlgebraTable* B = nullptr;
    SubspaceFamily G;
    int m = 0;
    int idx_k = -1; // index of k = span{1}
    int idx_B = -1; // index of B itself

    // above[i].test(j)  <=>  member_i is contained in member_j.
    std::vector<DynBitset> above;
    // colon_idx[i][b] = index of (member_i : element b), -1 if outside G.
    std::vector<std::vector<int>> colon_idx;
    // colon_targets[i] = bitset of all in-G colon images of member_i.
    std::vector<DynBitset> colon_targets;
    // pii[i][j] = index of member_i ∩ member_j, -1 if outside G.
    std::vector<std::vector<int>> pii;

    std::uint64_t num_elements = 0; // q^n

    const Subspace& member(int i) const { return G.members[i]; }
};

FamilyContext build_context(const AlgebraTable& B, SubspaceFamily G,
                            const Budget& budget = Budget{});

struct StarOperation {
    const FamilyContext* ctx = nullptr;
    std::vector<int> closure_map; // member index -> member index
    DynBitset closed;             // fixed points; determines the map

    bool operator==(const StarOperation& o) const { return closed == o.closed; }
};

struct AxiomViolation {
    std::string axiom; // "star" | "extensive" | "idempotent" | "monotone" | "multiplicative"
    int i = -1;
    int j = -1;
    std::uint64_t b = std::uint64_t(-1); // element id for the multiplicative axiom
    std::string detail;
};

// Ground-truth oracle: checks closure(k) = k, B closed, extensivity,
// idempotence, monotonicity on all comparable pairs, and the multiplicative
// axiom over every (I, b) with (I : b) in G. Returns the first violation.
std::optional<AxiomViolation> is_valid_multiplicative(const FamilyContext& ctx,
                                                      const StarOperation& op);

// Rebuild the closure map of a valid closed set (min-above); throws if some
// member has no unique minimal closed superset.
StarOperation op_from_closed(const FamilyContext& ctx, const DynBitset& closed);

// As above but returns nullopt instead of throwing (dual-route candidates).
std::optional<StarOperation> try_op_from_closed(const FamilyContext& ctx,
                                                const DynBitset& closed);

// The largest valid operation closing member i (and k): computed as the
// least fixed set containing {k, B, i} that is stable under in-G colons and
// in-G pairwise intersections.
StarOperation principal_closure(const FamilyContext& ctx, int i);

// Pointwise intersection of closures; closed set = intersection-completed
// union. The empty meet is principal_closure(B).
StarOperation meet(const StarOperation& a, const StarOperation& b);
StarOperation meet_list(const FamilyContext& ctx, const std::vector<int>& members);

struct ClassPoset {
    // Equivalence classes of G minus {B} under I ~ J iff fixed(*_I) =
    // fixed(*_J); classes hold sorted member indices and are ordered by
    // their smallest member (= smallest fingerprint).
    std::vector<std::vector<int>> classes;
    std::vector<int> rep;            // smallest member index per class
    std::vector<int> class_of;       // member index -> class id, -1 for B
    std::vector<DynBitset> fixed_sets; // fixed set of the class's principal op
    std::vector<DynBitset> leq;      // leq[a].test(b) <=> [a] ⪯ [b]
    int class_of_k = -1;

    int size() const { return int(classes.size()); }
};

ClassPoset compute_classes(const FamilyContext& ctx);

struct EnumerationResult {
    std::vector<StarOperation> ops; // sorted by (|closed|, closed bitset)
    ClassPoset poset;
    bool cross_checked = false;
    bool dual_match = false;    // meaningful when cross_checked
    std::string dual_detail;    // first discrepancy, empty when matching
};

// Primary route: BFS meet-closure over class-representative principal
// operations, starting from the trivial operation. Every emitted operation
// is re-validated against the oracle. With cross_check, a second enumerator
// (downsets of the class poset, min-above reconstruction, oracle filter)
// runs and the fingerprint sets are compared.
EnumerationResult enumerate_star_operations(const FamilyContext& ctx,
                                            const Budget& budget = Budget{},
                                            bool cross_check = false);

// Structural canonical-ideal test: contains 1, codimension 1, and Z(I) = 0.
// Returns false when 1 is not in I.
bool is_canonical(const AlgebraTable& B, const Subspace& I);

// Family selection: resolves F_0 vs F_1 and records whether F_0 = F_reg on
// this instance. request: F0 -> use F_0 as-is; F1 -> verify the reduction
// hypothesis and throw mismatch_error when it fails; nullopt (auto) -> F_1
// when F_0 = F_reg, else F_0.
struct WorkingFamily {
    SubspaceFamily family;
    FamilyKind used = FamilyKind::F0;
    bool f0_equals_freg = false;
    int f0_size = 0;
};
WorkingFamily select_working_family(const AlgebraTable& B,
                                    std::optional<FamilyKind> request,
                                    const Budget& budget = Budget{});

struct WitnessFamily {
    std::vector<int> members;      // family indices
    std::vector<int> images;       // closure under the meet of the others
    std::vector<Vec> certificates; // escape witness per member
    bool independent = false;
    int failed_member = -1; // index into members on failure
    int pruned = 0;         // members dropped to restore independence
};

// Each member must escape the meet of the principal operations of the
// others (with the image and one escaping element recorded).
WitnessFamily check_independent_family(const FamilyContext& ctx,
                                       const std::vector<int>& members);

enum class WitnessMode { Local, Split };

// The I(alpha) = <1, alpha> construction: mode Local (t = 1) draws alpha
// from B minus k, skipping those whose span contains X^{f-1} when f >= 2;
// mode Split (t >= 2) draws alpha from the elements that vanish on the last
// component, are a unit of the complementary factor, and do not lie on the
// line of 1 restricted to that factor. One representative per ~-class, then
// greedily pruned until independent.
WitnessFamily build_witness_family(const FamilyContext& ctx, WitnessMode mode,
                                   const ClassPoset& poset);

// Unit-translation invariant over the enumerated operations: closure(uI) =
// u closure(I) for all units u. Returns false with detail on violation.
bool verify_unit_translation(const FamilyContext& ctx,
                             const std::vector<StarOperation>& ops,
                             std::string* detail = nullptr);

struct ProductCheck {
    mpz_class lambda1, lambda2, lambda12;
    bool holds = false;       // lambda12 >= lambda1 * lambda2
    bool deep_ran = false;
    bool deep_injective = false;
    std::string detail;       // first deep-check failure, empty otherwise
};

// Count-level check that operations multiply across a product of algebras,
// plus (with deep) the embedding itself: each pair of operations is sent to
// the one generated by the lifts of their fixed members, which must be a
// valid operation of the product, distinct across pairs, and satisfy
// closure(I x B2) = closure(I) x B2 (and symmetrically). The deep route
// forces the full working family on all three algebras so every lift is a
// member; without deep, each algebra uses its auto-selected family.
ProductCheck check_product_embedding(const Shape& s1, const Shape& s2,
                                     const FieldTable& k,
                                     const Budget& budget = Budget{},
                                     bool deep = false);

} // namespace starlat
