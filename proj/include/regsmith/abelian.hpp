#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "regsmith/group_type.hpp"

namespace regsmith::abelian {

/// Caps for the exhaustive operations. Defaults cover everything the
/// verification suites need with room to spare.
struct EnumerationBudget {
    std::uint64_t max_order = 1ull << 12;     // largest group materialized
    std::uint64_t max_subgroups = 200'000;    // subgroup lattice cap
    std::uint64_t max_pairing_grams = 1ull << 25;  // Gram matrices scanned
    std::uint64_t max_hom_assignments = 1ull << 24;
};

/// A GroupType small enough to do element-level work in: fixed cyclic
/// decomposition (primes ascending, exponents descending), elements as
/// coordinate vectors. Construction enforces the enumeration budget.
class Group {
public:
    explicit Group(GroupType type, std::uint64_t max_order = EnumerationBudget{}.max_order);

    const GroupType& type() const { return type_; }
    int num_factors() const { return static_cast<int>(mods_.size()); }
    std::uint64_t factor_order(int i) const { return mods_[i]; }
    std::int64_t factor_prime(int i) const { return primes_[i]; }
    int factor_exponent(int i) const { return exps_[i]; }
    std::uint64_t order() const { return order_; }

    using Element = std::vector<std::uint64_t>;

    Element zero() const { return Element(mods_.size(), 0); }
    Element add(const Element& a, const Element& b) const;
    Element sub(const Element& a, const Element& b) const;
    Element neg(const Element& a) const;
    Element scale(const Int& k, const Element& a) const;
    bool is_zero(const Element& a) const;

    /// Reduces arbitrary integer coordinates into canonical range.
    Element make(const std::vector<std::int64_t>& coords) const;

    std::uint64_t encode(const Element& a) const;
    Element decode(std::uint64_t idx) const;

    /// Sorted encodings of the subgroup generated by gens.
    std::vector<std::uint64_t> closure(const std::vector<Element>& gens) const;

private:
    GroupType type_;
    std::vector<std::uint64_t> mods_;
    std::vector<std::int64_t> primes_;
    std::vector<int> exps_;
    std::uint64_t order_;
};

/// Subgroup of an ambient Group, kept as a generator list plus the full
/// (budget-bounded) element set, immutable after construction.
class Subgroup {
public:
    Subgroup(std::shared_ptr<const Group> ambient, std::vector<Group::Element> generators);

    const Group& ambient() const { return *ambient_; }
    std::shared_ptr<const Group> ambient_ptr() const { return ambient_; }
    const std::vector<Group::Element>& generators() const { return gens_; }
    const std::vector<std::uint64_t>& elements() const { return elems_; }  // sorted encodings
    std::uint64_t order() const { return elems_.size(); }
    bool contains(const Group::Element& x) const;
    bool contains_encoded(std::uint64_t idx) const;
    GroupType type() const;
    bool same_set(const Subgroup& other) const { return elems_ == other.elems_; }

    /// Image subgroup {k*h : h in this}.
    Subgroup scaled(const Int& k) const;

private:
    std::shared_ptr<const Group> ambient_;
    std::vector<Group::Element> gens_;
    std::vector<std::uint64_t> elems_;
};

/// Coset rep + H of an ambient group. Equality is set equality.
class Coset {
public:
    Coset(Subgroup sub, Group::Element rep);

    const Subgroup& subgroup() const { return sub_; }
    const Group::Element& representative() const { return rep_; }
    bool contains(const Group::Element& x) const;
    bool operator==(const Coset& o) const;
    std::uint64_t canonical_rep_encoded() const;  // min encoding in the coset
    bool is_whole_group() const { return sub_.order() == sub_.ambient().order(); }

private:
    Subgroup sub_;
    Group::Element rep_;
};

/// (r,m)-pair: group V with coset C = gamma + H such that
///   (1) r*(V/H) = 0, (2) gamma generates V/H, (3) m*r*gamma lies in r*H.
/// All three are machine-checked at construction.
class RMPair {
public:
    RMPair(GroupType group, Coset coset, Int r, Int m);

    const GroupType& group() const { return group_; }
    const Coset& coset() const { return coset_; }
    const Int& r() const { return r_; }
    const Int& m() const { return m_; }
    GroupType subgroup_type() const { return coset_.subgroup().type(); }

private:
    GroupType group_;
    Coset coset_;
    Int r_, m_;
};

// ---------------------------------------------------------------------------
// Operations

/// GroupType of a direct sum of cyclic groups (CRT splitting into primary
/// form). Orders must all be >= 2.
GroupType canonicalize(const std::vector<Int>& cyclic_orders);

/// |Aut(G)|, exact, multiplicative over primes (closed form per prime).
Int aut_order(const GroupType& g);

/// |Hom(G, H)|, exact closed form.
Int hom_count(const GroupType& g, const GroupType& h);

/// Shape of the source group seen by hom-counting: exponents of the finite
/// p-power factors plus a count of unbounded slots (free summands or factors
/// whose exponent exceeds every target exponent).
struct PPartProfile {
    std::vector<int> exponents;   // >= 1 each; order irrelevant
    std::int64_t unbounded = 0;
};
using SourceProfile = std::map<std::int64_t, PPartProfile>;

SourceProfile profile_of(const GroupType& g);
Int hom_count_profile(const SourceProfile& src, const GroupType& h);

/// |Sur(G, H)| by inclusion-exclusion over the subgroup lattice of H
/// (per Sylow factor; Moebius data cached per target type).
Int count_surjections(const GroupType& g, const GroupType& h,
                      const EnumerationBudget& budget = {});
Int sur_count_profile(const SourceProfile& src, const GroupType& h,
                      const EnumerationBudget& budget = {});

/// |G[r]| = number of elements killed by r.
Int torsion_count(const GroupType& g, const Int& r);

/// Exterior square of G (closed form; validated against a presentation
/// oracle in the test suite).
GroupType exterior_square(const GroupType& g);

/// Number of symmetric bilinear perfect pairings G x G -> Q/Z, by brute
/// force over Gram matrices on the canonical generators.
Int count_perfect_symmetric_pairings(const GroupType& g, const EnumerationBudget& budget = {});

/// Every subgroup exactly once, as zero-representative cosets, sorted by
/// (order, element set).
std::vector<Coset> enumerate_subgroups(const GroupType& g, const EnumerationBudget& budget = {});

/// All (r,m)-pairs on V, distinct cosets counted once.
std::vector<RMPair> enumerate_rm_pairs(const GroupType& v, const Int& r, const Int& m,
                                       const EnumerationBudget& budget = {});

/// Largest divisor of n composed of the given primes.
Int largest_divisor_supported(const Int& n, const std::vector<std::int64_t>& primes);

}  // namespace regsmith::abelian
